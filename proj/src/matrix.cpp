#include "tarnn/matrix.hpp"

#include <cmath>

#include "tarnn/kernels.hpp"

namespace tarnn {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const DenseMatrix& m) {
  return all_finite(std::span<const double>(m.data(), m.size()));
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul shape mismatch");
  DenseMatrix c(a.rows(), b.cols());
  kern::active().gemm_nn(a.data(), a.cols(), b.data(), b.cols(), c.data(),
                         c.cols(), a.rows(), a.cols(), b.cols());
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt shape mismatch");
  DenseMatrix c(a.rows(), b.rows());
  kern::active().gemm_nt(a.data(), a.cols(), b.data(), b.cols(), c.data(),
                         c.cols(), a.rows(), a.cols(), b.rows());
  return c;
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matvec shape mismatch");
  Vector y(a.rows(), 0.0);
  kern::active().gemv(a.data(), a.cols(), x.data(), y.data(), a.rows(), a.cols());
  return y;
}

double max_abs(const DenseMatrix& m) {
  double r = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) r = std::max(r, std::fabs(m.data()[i]));
  return r;
}

double frobenius_norm(const DenseMatrix& m) {
  return std::sqrt(kern::active().dot(m.size(), m.data(), m.data()));
}

double norm2(std::span<const double> v) {
  return std::sqrt(kern::active().dot(v.size(), v.data(), v.data()));
}

}  // namespace tarnn
