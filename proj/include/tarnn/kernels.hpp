#pragma once
// Dense arithmetic kernels used by every hot loop in the library.
//
// Each kernel has a scalar reference implementation and (on x86-64) an
// AVX2+FMA variant. The active set is chosen once at startup from CPUID,
// and can be forced with set_backend() or the TARNN_KERNELS environment
// variable ("scalar", "avx2", "auto"). SIMD and scalar variants are
// equivalence-tested against each other; they may differ by summation
// order only.

#include <cstddef>
#include <string>

namespace tarnn::kern {

enum class Backend { Auto, Scalar, Avx2 };

// Kernel function table. All matrices are row-major with explicit leading
// dimensions; all kernels accumulate into their output unless noted.
struct Kernels {
  // c[m x n] += a[m x k] * b[k x n]
  void (*gemm_nn)(const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                  std::size_t k, std::size_t n);
  // c[m x n] += a[m x k] * b[n x k]^T
  void (*gemm_nt)(const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                  std::size_t k, std::size_t n);
  // c[m x n] += a[k x m]^T * b[k x n]
  void (*gemm_tn)(const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                  std::size_t k, std::size_t n);
  // y[m] += a[m x n] * x[n]
  void (*gemv)(const double* a, std::size_t lda, const double* x, double* y,
               std::size_t m, std::size_t n);
  // y[n] += a[m x n]^T * x[m]
  void (*gemv_t)(const double* a, std::size_t lda, const double* x, double* y,
                 std::size_t m, std::size_t n);
  // y[n] += alpha * x[n]
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);
  // h[n] = (1 - ad) * h[n] + ad * drive[n]          (leaky state mix)
  void (*leaky_mix)(std::size_t n, double ad, double* h, const double* drive);
  // h[n] = (1 - dt*z[n]) * h[n] + dt*z[n] * c[n]    (gated state mix)
  void (*gate_mix)(std::size_t n, double dt, const double* z, const double* c,
                   double* h);
  const char* name;
};

// Active kernel set (dispatch target).
const Kernels& active();

void set_backend(Backend b);
Backend backend();
std::string backend_name();
bool avx2_available();

// Reference implementations, callable directly (tests compare against these).
extern const Kernels scalar_kernels;
#if defined(__x86_64__) || defined(_M_X64)
extern const Kernels avx2_kernels;
#endif

}  // namespace tarnn::kern
