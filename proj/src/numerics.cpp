#include "tarnn/numerics.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "tarnn/kernels.hpp"

namespace tarnn {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Largest eigenvalue modulus of a 2x2 block; a complex pair has
// |lambda|^2 == det.
double radius_2x2(double a, double b, double c, double d) {
  const double tr = a + d;
  const double det = a * d - b * c;
  const double disc = 0.25 * tr * tr - det;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return std::max(std::fabs(0.5 * tr + s), std::fabs(0.5 * tr - s));
  }
  return std::sqrt(det);
}

void normalize(Vector& v) {
  const double r = norm2(v);
  for (double& x : v) x /= r;
}

Vector random_unit(std::size_t n, RngStream& rng) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  normalize(v);
  return v;
}

// Aitken delta-squared extrapolation of a linearly converging sequence.
double aitken(double r0, double r1, double r2) {
  const double d2 = r2 - 2.0 * r1 + r0;
  if (std::fabs(d2) < 1e-300 || std::fabs(d2) < 1e-12 * std::fabs(r2))
    return r2;
  const double d = r2 - r1;
  return r2 - d * d / d2;
}

// Largest eigenvalue modulus of a small (p <= 8) dense matrix: Leverrier-
// Faddeev characteristic polynomial, roots by Durand-Kerner. Used only on
// the Ritz blocks of the subspace iteration.
double small_eig_radius(const DenseMatrix& b) {
  const std::size_t p = b.rows();
  // coefficients of lambda^p + c[1] lambda^{p-1} + ... + c[p]
  std::vector<double> coef(p + 1, 0.0);
  coef[0] = 1.0;
  DenseMatrix mk = b;
  for (std::size_t k = 1; k <= p; ++k) {
    double tr = 0.0;
    for (std::size_t i = 0; i < p; ++i) tr += mk(i, i);
    coef[k] = -tr / static_cast<double>(k);
    if (k == p) break;
    for (std::size_t i = 0; i < p; ++i) mk(i, i) += coef[k];
    mk = matmul(b, mk);
  }

  using C = std::complex<double>;
  std::vector<C> r(p);
  for (std::size_t i = 0; i < p; ++i)
    r[i] = std::pow(C(0.4, 0.9), static_cast<double>(i + 1));
  auto poly = [&](C x) {
    C v = coef[0];
    for (std::size_t k = 1; k <= p; ++k) v = v * x + coef[k];
    return v;
  };
  for (int it = 0; it < 400; ++it) {
    double moved = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      C denom(1.0, 0.0);
      for (std::size_t j = 0; j < p; ++j)
        if (j != i) denom *= r[i] - r[j];
      if (std::abs(denom) < 1e-300) denom = C(1e-300, 0);
      const C delta = poly(r[i]) / denom;
      r[i] -= delta;
      moved = std::max(moved, std::abs(delta));
    }
    if (moved < 1e-14) break;
  }
  double radius = 0.0;
  for (const C& x : r) radius = std::max(radius, std::abs(x));
  return radius;
}

}  // namespace

DenseMatrix random_uniform_matrix(std::size_t rows, std::size_t cols,
                                  double scale, RngStream& rng) {
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

double spectral_radius(const DenseMatrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("spectral_radius: matrix must be square");
  const std::size_t n = m.rows();
  if (n == 0) return 0.0;
  if (!all_finite(m))
    throw std::invalid_argument("spectral_radius: non-finite entries");
  if (n == 1) return std::fabs(m(0, 0));

  const double scale = max_abs(m);
  if (scale == 0.0) return 0.0;
  const double dead = scale * static_cast<double>(n) * kEps;

  RngStream rng(0x9E3779B97F4A7C15ull);
  const auto& K = kern::active();
  auto apply = [&](const Vector& x, Vector& y) {
    std::fill(y.begin(), y.end(), 0.0);
    K.gemv(m.data(), n, x.data(), y.data(), n, n);
  };

  // Stage 1: plain power iteration. Handles a simple real dominant
  // eigenvalue and normal complex pairs (whose growth factor converges
  // even while the direction keeps rotating).
  Vector v = random_unit(n, rng), w(n);
  double r_prev = -1.0;
  int stable = 0;
  int restarts = 0;
  const int cap1 = 2000;
  for (int it = 0; it < cap1; ++it) {
    apply(v, w);
    const double r = norm2(w);
    if (r <= dead) {
      // v fell (numerically) in the kernel; restart off a fresh vector.
      if (++restarts > 3) return 0.0;
      v = random_unit(n, rng);
      r_prev = -1.0;
      stable = 0;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / r;
    if (r_prev > 0.0 && std::fabs(r - r_prev) <= 1e-13 * r)
      ++stable;
    else
      stable = 0;
    if (stable >= 10) return r;
    r_prev = r;
  }

  // Stage 2: iterate a 2-column subspace and read the radius off the
  // projected 2x2 block. Resolves non-normal complex-conjugate pairs and
  // +/- modulus ties that defeat the single-vector iteration; Aitken
  // extrapolation accelerates the linear tail.
  Vector v0 = v, v1(n), w0(n), w1(n);
  apply(v0, v1);
  {  // orthonormalize v1 against v0
    const double c = K.dot(n, v0.data(), v1.data());
    K.axpy(n, -c, v0.data(), v1.data());
    double r1 = norm2(v1);
    if (r1 <= dead) {
      v1 = random_unit(n, rng);
      const double c2 = K.dot(n, v0.data(), v1.data());
      K.axpy(n, -c2, v0.data(), v1.data());
      r1 = norm2(v1);
    }
    for (double& x : v1) x /= r1;
  }

  double hist[3] = {0, 0, 0};
  double ext_prev = -1.0;
  int have = 0;
  stable = 0;
  const long cap2 = 5000;
  for (long it = 0; it < cap2; ++it) {
    apply(v0, w0);
    apply(v1, w1);
    const double b00 = K.dot(n, v0.data(), w0.data());
    const double b01 = K.dot(n, v0.data(), w1.data());
    const double b10 = K.dot(n, v1.data(), w0.data());
    const double b11 = K.dot(n, v1.data(), w1.data());
    const double r = radius_2x2(b00, b01, b10, b11);

    hist[0] = hist[1];
    hist[1] = hist[2];
    hist[2] = r;
    if (have < 3) ++have;
    const double ext = (have == 3) ? aitken(hist[0], hist[1], hist[2]) : r;
    if (ext_prev > 0.0 && std::fabs(ext - ext_prev) <= 1e-13 * std::fabs(ext) &&
        std::fabs(r - ext) <= 1e-11 * std::fabs(ext))
      ++stable;
    else
      stable = 0;
    if (stable >= 6) return ext;
    ext_prev = ext;

    // next basis = orth(w0, w1)
    double r0 = norm2(w0);
    if (r0 <= dead) {
      w0 = random_unit(n, rng);
      r0 = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) v0[i] = w0[i] / r0;
    const double c = K.dot(n, v0.data(), w1.data());
    K.axpy(n, -c, v0.data(), w1.data());
    double r1 = norm2(w1);
    if (r1 <= dead * std::max(1.0, r0)) {
      w1 = random_unit(n, rng);
      const double c2 = K.dot(n, v0.data(), w1.data());
      K.axpy(n, -c2, v0.data(), w1.data());
      r1 = norm2(w1);
    }
    for (std::size_t i = 0; i < n; ++i) v1[i] = w1[i] / r1;
  }

  // Stage 3: several dominant eigenvalues share a modulus to within the
  // two-column resolution; widen the subspace and take the Ritz radius.
  const std::size_t p = std::min<std::size_t>(6, n);
  std::vector<Vector> basis(p, Vector(n)), image(p, Vector(n));
  basis[0] = v0;
  if (p > 1) basis[1] = v1;
  for (std::size_t j = 2; j < p; ++j) basis[j] = random_unit(n, rng);
  auto orthonormalize = [&](std::vector<Vector>& vs) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        const double c = K.dot(n, vs[i].data(), vs[j].data());
        K.axpy(n, -c, vs[i].data(), vs[j].data());
      }
      double r = norm2(vs[j]);
      if (r <= dead) {
        vs[j] = random_unit(n, rng);
        for (std::size_t i = 0; i < j; ++i) {
          const double c = K.dot(n, vs[i].data(), vs[j].data());
          K.axpy(n, -c, vs[i].data(), vs[j].data());
        }
        r = norm2(vs[j]);
      }
      for (double& x : vs[j]) x /= r;
    }
  };
  orthonormalize(basis);

  hist[0] = hist[1] = hist[2] = 0.0;
  ext_prev = -1.0;
  have = 0;
  stable = 0;
  const long cap3 = std::max<long>(60000, 60000000 / static_cast<long>(n));
  DenseMatrix ritz(p, p);
  for (long it = 0; it < cap3; ++it) {
    for (std::size_t j = 0; j < p; ++j) apply(basis[j], image[j]);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        ritz(i, j) = K.dot(n, basis[i].data(), image[j].data());
    const double r = small_eig_radius(ritz);

    hist[0] = hist[1];
    hist[1] = hist[2];
    hist[2] = r;
    if (have < 3) ++have;
    const double ext = (have == 3) ? aitken(hist[0], hist[1], hist[2]) : r;
    if (ext_prev > 0.0 && std::fabs(ext - ext_prev) <= 1e-13 * std::fabs(ext) &&
        std::fabs(r - ext) <= 1e-10 * std::fabs(ext))
      ++stable;
    else
      stable = 0;
    if (stable >= 6) return ext;
    ext_prev = ext;

    basis.swap(image);
    orthonormalize(basis);
  }
  throw std::runtime_error(
      "spectral_radius: iteration cap reached without convergence "
      "(degenerate spectrum)");
}

DenseMatrix scale_to_radius(const DenseMatrix& m, double target) {
  if (target <= 0.0)
    throw std::invalid_argument("scale_to_radius: target must be positive");
  const double rho = spectral_radius(m);
  if (rho <= 0.0)
    throw std::runtime_error(
        "scale_to_radius: matrix has zero spectral radius, cannot rescale");
  DenseMatrix out = m;
  out *= target / rho;
  return out;
}

namespace {

// In-place lower Cholesky; false when the matrix is not (numerically)
// positive definite.
bool cholesky(DenseMatrix& g) {
  const std::size_t n = g.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, std::fabs(g(i, i)));
  const double floor = max_diag * static_cast<double>(n) * kEps;
  const auto& K = kern::active();
  for (std::size_t j = 0; j < n; ++j) {
    double d = g(j, j) - K.dot(j, &g(j, 0), &g(j, 0));
    if (!(d > floor)) return false;
    d = std::sqrt(d);
    g(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double s = g(i, j) - K.dot(j, &g(i, 0), &g(j, 0));
      g(i, j) = s / d;
    }
  }
  return true;
}

void chol_solve(const DenseMatrix& L, Vector& b) {
  const std::size_t n = L.rows();
  const auto& K = kern::active();
  for (std::size_t i = 0; i < n; ++i)
    b[i] = (b[i] - K.dot(i, L.data() + i * n, b.data())) / L(i, i);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= L(j, ii) * b[j];
    b[ii] = s / L(ii, ii);
  }
}

// LU with partial pivoting; throws on a numerically singular pivot.
struct Lu {
  DenseMatrix a;
  std::vector<std::size_t> perm;
};

Lu lu_factor(DenseMatrix g) {
  const std::size_t n = g.rows();
  const double tiny = max_abs(g) * static_cast<double>(n) * kEps;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(g(i, k)) > std::fabs(g(p, k))) p = i;
    if (std::fabs(g(p, k)) <= tiny)
      throw std::runtime_error(
          "ridge_solve: singular normal equations (increase lambda)");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(g(p, j), g(k, j));
      std::swap(perm[p], perm[k]);
    }
    const double inv = 1.0 / g(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = g(i, k) * inv;
      g(i, k) = f;
      if (f != 0.0)
        kern::active().axpy(n - k - 1, -f, &g(k, k + 1), &g(i, k + 1));
    }
  }
  return {std::move(g), std::move(perm)};
}

void lu_solve(const Lu& lu, const Vector& b, Vector& x) {
  const std::size_t n = lu.a.rows();
  for (std::size_t i = 0; i < n; ++i) x[i] = b[lu.perm[i]];
  for (std::size_t i = 1; i < n; ++i)
    x[i] -= kern::active().dot(i, lu.a.data() + i * n, x.data());
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= lu.a(ii, j) * x[j];
    x[ii] = s / lu.a(ii, ii);
  }
}

}  // namespace

DenseMatrix ridge_solve(const DenseMatrix& states, const DenseMatrix& targets,
                        double lambda) {
  if (states.cols() != targets.cols())
    throw std::invalid_argument("ridge_solve: sample count mismatch");
  if (states.cols() == 0)
    throw std::invalid_argument("ridge_solve: need at least one sample");
  if (lambda < 0.0)
    throw std::invalid_argument("ridge_solve: negative regularization");

  const std::size_t f = states.rows();
  const std::size_t o = targets.rows();

  DenseMatrix gram = matmul_nt(states, states);
  for (std::size_t i = 0; i < f; ++i) gram(i, i) += lambda;
  const DenseMatrix rhs = matmul_nt(targets, states);  // [o x f]

  DenseMatrix w(o, f);
  DenseMatrix chol_fac = gram;
  if (cholesky(chol_fac)) {
    Vector b(f);
    for (std::size_t r = 0; r < o; ++r) {
      for (std::size_t j = 0; j < f; ++j) b[j] = rhs(r, j);
      chol_solve(chol_fac, b);
      for (std::size_t j = 0; j < f; ++j) w(r, j) = b[j];
    }
    return w;
  }

  const Lu lu = lu_factor(gram);
  Vector b(f), x(f);
  for (std::size_t r = 0; r < o; ++r) {
    for (std::size_t j = 0; j < f; ++j) b[j] = rhs(r, j);
    lu_solve(lu, b, x);
    for (std::size_t j = 0; j < f; ++j) w(r, j) = x[j];
  }
  return w;
}

}  // namespace tarnn
