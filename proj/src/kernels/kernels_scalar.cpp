#include "tarnn/kernels.hpp"

// Scalar reference kernels. These are the ground truth the SIMD variants
// are tested against, and the fallback on CPUs without AVX2.

namespace tarnn::kern {
namespace {

void gemm_nn_scalar(const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    double* crow = c + i * ldc;
    for (std::size_t l = 0; l < k; ++l) {
      const double av = arow[l];
      const double* brow = b + l * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt_scalar(const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    double* crow = c + i * ldc;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * ldb;
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
      crow[j] += acc;
    }
  }
}

void gemm_tn_scalar(const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t l = 0; l < k; ++l) {
    const double* arow = a + l * lda;
    const double* brow = b + l * ldb;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = c + i * ldc;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemv_scalar(const double* a, std::size_t lda, const double* x, double* y,
                 std::size_t m, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += arow[j] * x[j];
    y[i] += acc;
  }
}

void gemv_t_scalar(const double* a, std::size_t lda, const double* x, double* y,
                   std::size_t m, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    const double xi = x[i];
    for (std::size_t j = 0; j < n; ++j) y[j] += xi * arow[j];
  }
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot_scalar(std::size_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void leaky_mix_scalar(std::size_t n, double ad, double* h,
                      const double* drive) {
  const double keep = 1.0 - ad;
  for (std::size_t i = 0; i < n; ++i) h[i] = keep * h[i] + ad * drive[i];
}

void gate_mix_scalar(std::size_t n, double dt, const double* z, const double* c,
                     double* h) {
  for (std::size_t i = 0; i < n; ++i) {
    const double g = dt * z[i];
    h[i] = (1.0 - g) * h[i] + g * c[i];
  }
}

}  // namespace

const Kernels scalar_kernels = {gemm_nn_scalar, gemm_nt_scalar, gemm_tn_scalar,
                                gemv_scalar,    gemv_t_scalar,  axpy_scalar,
                                dot_scalar,     leaky_mix_scalar,
                                gate_mix_scalar, "scalar"};

}  // namespace tarnn::kern
