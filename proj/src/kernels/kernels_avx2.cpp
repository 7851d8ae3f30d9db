#include "tarnn/kernels.hpp"

// AVX2+FMA kernel variants. Compiled as a separate translation unit with
// -mavx2 -mfma; only ever called after the CPUID check in dispatch.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace tarnn::kern {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// 4x8 register-blocked C += A*B micro kernel. B rows are contiguous, A
// entries are broadcast; accumulators stay in registers across the k loop.
template <int MR>
inline void gemm_nn_block(const double* a, std::size_t lda, const double* b,
                          std::size_t ldb, double* c, std::size_t ldc,
                          std::size_t k, std::size_t j) {
  __m256d acc[MR][2];
  for (int r = 0; r < MR; ++r) {
    acc[r][0] = _mm256_loadu_pd(c + r * ldc + j);
    acc[r][1] = _mm256_loadu_pd(c + r * ldc + j + 4);
  }
  for (std::size_t l = 0; l < k; ++l) {
    const __m256d b0 = _mm256_loadu_pd(b + l * ldb + j);
    const __m256d b1 = _mm256_loadu_pd(b + l * ldb + j + 4);
    for (int r = 0; r < MR; ++r) {
      const __m256d av = _mm256_set1_pd(a[r * lda + l]);
      acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
    }
  }
  for (int r = 0; r < MR; ++r) {
    _mm256_storeu_pd(c + r * ldc + j, acc[r][0]);
    _mm256_storeu_pd(c + r * ldc + j + 4, acc[r][1]);
  }
}

void gemm_nn_avx2(const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                  std::size_t k, std::size_t n) {
  // column panels keep the reused B block cache-resident on tall products;
  // each c[i][j] still sees one ordered k-sweep, so blocking does not
  // change the result
  constexpr std::size_t kPanel = 64;
  const std::size_t n8 = n - n % 8;
  for (std::size_t j0 = 0; j0 < n8; j0 += kPanel) {
    const std::size_t j1 = std::min(j0 + kPanel, n8);
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4)
      for (std::size_t j = j0; j < j1; j += 8)
        gemm_nn_block<4>(a + i * lda, lda, b, ldb, c + i * ldc, ldc, k, j);
    for (; i < m; ++i)
      for (std::size_t j = j0; j < j1; j += 8)
        gemm_nn_block<1>(a + i * lda, lda, b, ldb, c + i * ldc, ldc, k, j);
  }
  if (n8 < n) {  // column remainder, scalar
    for (std::size_t r = 0; r < m; ++r) {
      const double* arow = a + r * lda;
      double* crow = c + r * ldc;
      for (std::size_t l = 0; l < k; ++l) {
        const double av = arow[l];
        const double* brow = b + l * ldb;
        for (std::size_t j = n8; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

void gemm_tn_avx2(const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                  std::size_t k, std::size_t n) {
  const std::size_t n4 = n - n % 4;
  for (std::size_t l = 0; l < k; ++l) {
    const double* arow = a + l * lda;
    const double* brow = b + l * ldb;
    for (std::size_t i = 0; i < m; ++i) {
      const __m256d av = _mm256_set1_pd(arow[i]);
      double* crow = c + i * ldc;
      std::size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        cv = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), cv);
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += arow[i] * brow[j];
    }
  }
}

inline __m256d dot4_acc(const double* x, const double* y, std::size_t len,
                        double* tail) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= len; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double t = 0.0;
  for (; i < len; ++i) t += x[i] * y[i];
  *tail = t;
  return _mm256_add_pd(acc0, acc1);
}

void gemm_nt_avx2(const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                  std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    double* crow = c + i * ldc;
    for (std::size_t j = 0; j < n; ++j) {
      double tail;
      const __m256d acc = dot4_acc(arow, b + j * ldb, k, &tail);
      crow[j] += hsum(acc) + tail;
    }
  }
}

void gemv_avx2(const double* a, std::size_t lda, const double* x, double* y,
               std::size_t m, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double tail;
    const __m256d acc = dot4_acc(a + i * lda, x, n, &tail);
    y[i] += hsum(acc) + tail;
  }
}

void gemv_t_avx2(const double* a, std::size_t lda, const double* x, double* y,
                 std::size_t m, std::size_t n) {
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    const __m256d xi = _mm256_set1_pd(x[i]);
    std::size_t j = 0;
    for (; j < n4; j += 4) {
      __m256d yv = _mm256_loadu_pd(y + j);
      yv = _mm256_fmadd_pd(xi, _mm256_loadu_pd(arow + j), yv);
      _mm256_storeu_pd(y + j, yv);
    }
    for (; j < n; ++j) y[j] += x[i] * arow[j];
  }
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  double tail;
  const __m256d acc = dot4_acc(x, y, n, &tail);
  return hsum(acc) + tail;
}

void leaky_mix_avx2(std::size_t n, double ad, double* h, const double* drive) {
  const __m256d adv = _mm256_set1_pd(ad);
  const __m256d keep = _mm256_set1_pd(1.0 - ad);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d hv = _mm256_loadu_pd(h + i);
    const __m256d dv = _mm256_loadu_pd(drive + i);
    _mm256_storeu_pd(h + i,
                     _mm256_fmadd_pd(adv, dv, _mm256_mul_pd(keep, hv)));
  }
  const double keep_s = 1.0 - ad;
  for (; i < n; ++i) h[i] = keep_s * h[i] + ad * drive[i];
}

void gate_mix_avx2(std::size_t n, double dt, const double* z, const double* c,
                   double* h) {
  const __m256d dtv = _mm256_set1_pd(dt);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_mul_pd(dtv, _mm256_loadu_pd(z + i));
    const __m256d hv = _mm256_loadu_pd(h + i);
    const __m256d cv = _mm256_loadu_pd(c + i);
    const __m256d keep = _mm256_sub_pd(one, g);
    _mm256_storeu_pd(h + i,
                     _mm256_fmadd_pd(g, cv, _mm256_mul_pd(keep, hv)));
  }
  for (; i < n; ++i) {
    const double g = dt * z[i];
    h[i] = (1.0 - g) * h[i] + g * c[i];
  }
}

}  // namespace

const Kernels avx2_kernels = {gemm_nn_avx2, gemm_nt_avx2, gemm_tn_avx2,
                              gemv_avx2,    gemv_t_avx2,  axpy_avx2,
                              dot_avx2,     leaky_mix_avx2,
                              gate_mix_avx2, "avx2"};

}  // namespace tarnn::kern

#endif  // x86-64
