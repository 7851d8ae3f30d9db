#include "tarnn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tarnn/timegrid.hpp"

namespace tarnn {
namespace {

using State3 = std::array<double, 3>;

State3 lorenz_deriv(const LorenzConfig& c, const State3& s) {
  return {c.sigma * (s[1] - s[0]), s[0] * (c.rho - s[2]) - s[1],
          s[0] * s[1] - c.beta * s[2]};
}

State3 rk4_lorenz(const LorenzConfig& c, const State3& s, double dt) {
  const State3 k1 = lorenz_deriv(c, s);
  State3 t;
  for (int i = 0; i < 3; ++i) t[i] = s[i] + 0.5 * dt * k1[i];
  const State3 k2 = lorenz_deriv(c, t);
  for (int i = 0; i < 3; ++i) t[i] = s[i] + 0.5 * dt * k2[i];
  const State3 k3 = lorenz_deriv(c, t);
  for (int i = 0; i < 3; ++i) t[i] = s[i] + dt * k3[i];
  const State3 k4 = lorenz_deriv(c, t);
  State3 out;
  for (int i = 0; i < 3; ++i)
    out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace

SampledSeries generate_lorenz(const LorenzConfig& cfg) {
  if (cfg.n_steps < 1)
    throw std::invalid_argument("generate_lorenz: n_steps must be >= 1");
  if (!(cfg.base_dt > 0.0))
    throw std::invalid_argument("generate_lorenz: base_dt must be > 0");

  State3 s = cfg.initial;
  for (std::size_t i = 0; i < cfg.transient; ++i)
    s = rk4_lorenz(cfg, s, cfg.base_dt);

  RngStream rng(cfg.seed);
  const auto gaps =
      sample_irregular_steps(cfg.pi, cfg.base_dt, cfg.n_steps - 1, rng);

  SampledSeries out;
  out.timestamps.reserve(cfg.n_steps);
  out.values = DenseMatrix(cfg.n_steps, 3);
  double t = 0.0;
  out.timestamps.push_back(t);
  for (int j = 0; j < 3; ++j) out.values(0, j) = s[j];
  for (std::size_t i = 1; i < cfg.n_steps; ++i) {
    s = rk4_lorenz(cfg, s, gaps[i - 1]);
    if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || !std::isfinite(s[2]))
      throw std::runtime_error("generate_lorenz: state blew up");
    t += gaps[i - 1];
    out.timestamps.push_back(t);
    for (int j = 0; j < 3; ++j) out.values(i, j) = s[j];
  }
  return out;
}

SampledSeries generate_mackey_glass(const MackeyGlassConfig& cfg) {
  if (!(cfg.tau > 0.0) || !(cfg.fine_dt > 0.0))
    throw std::invalid_argument("generate_mackey_glass: tau and fine_dt must be > 0");
  const std::size_t total = cfg.transient + cfg.n_steps;
  const double delay_steps = cfg.tau / cfg.fine_dt;

  std::vector<double> x(total + 1);
  x[0] = cfg.history;

  // Delayed value at fractional grid index; indices before the start fall
  // back to the constant pre-history.
  auto delayed = [&](double idx) -> double {
    if (idx <= 0.0) return cfg.history;
    const auto lo = static_cast<std::size_t>(idx);
    const double frac = idx - static_cast<double>(lo);
    if (frac == 0.0) return x[lo];
    return x[lo] + frac * (x[lo + 1] - x[lo]);
  };
  auto deriv = [&](double xv, double xdel) {
    return cfg.beta * xdel / (1.0 + std::pow(xdel, cfg.n_exp)) - cfg.gamma * xv;
  };

  const double dt = cfg.fine_dt;
  for (std::size_t k = 0; k < total; ++k) {
    const double kd = static_cast<double>(k);
    const double d0 = delayed(kd - delay_steps);
    const double dh = delayed(kd + 0.5 - delay_steps);
    const double d1 = delayed(kd + 1.0 - delay_steps);
    const double k1 = deriv(x[k], d0);
    const double k2 = deriv(x[k] + 0.5 * dt * k1, dh);
    const double k3 = deriv(x[k] + 0.5 * dt * k2, dh);
    const double k4 = deriv(x[k] + dt * k3, d1);
    x[k + 1] = x[k] + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(x[k + 1]))
      throw std::runtime_error("generate_mackey_glass: state blew up");
  }

  SampledSeries out;
  out.timestamps.reserve(cfg.n_steps);
  out.values = DenseMatrix(cfg.n_steps, 1);
  for (std::size_t i = 0; i < cfg.n_steps; ++i) {
    out.timestamps.push_back(static_cast<double>(i) * dt);
    out.values(i, 0) = x[cfg.transient + i];
  }
  return out;
}

namespace {

// Natural cubic spline: second derivatives from the standard tridiagonal
// system, zero curvature at both ends.
struct Spline {
  std::vector<double> t, y, m2;

  double eval(double q) const {
    const auto it = std::upper_bound(t.begin(), t.end(), q);
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    if (i + 1 >= t.size()) i = t.size() - 2;
    const double h = t[i + 1] - t[i];
    const double a = (t[i + 1] - q) / h;
    const double b = (q - t[i]) / h;
    return a * y[i] + b * y[i + 1] +
           ((a * a * a - a) * m2[i] + (b * b * b - b) * m2[i + 1]) * h * h / 6.0;
  }
};

Spline fit_spline(std::span<const double> t, std::span<const double> y) {
  const std::size_t n = t.size();
  Spline sp;
  sp.t.assign(t.begin(), t.end());
  sp.y.assign(y.begin(), y.end());
  sp.m2.assign(n, 0.0);
  if (n < 3) return sp;  // degenerates to linear interpolation

  std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  // Thomas sweep over the interior rows; lower elements equal h0.
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1];
    const double w = h0 / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    sp.m2[i] = (rhs[i] - upper[i] * sp.m2[i + 1]) / diag[i];
    if (i == 1) break;
  }
  return sp;
}

}  // namespace

SampledSeries cubic_spline_resample(const SampledSeries& fine,
                                    std::span<const double> query_times) {
  if (fine.length() < 2)
    throw std::invalid_argument("cubic_spline_resample: need >= 2 knots");
  const double t0 = fine.timestamps.front();
  const double t1 = fine.timestamps.back();
  for (double q : query_times)
    if (q < t0 || q > t1)
      throw std::invalid_argument(
          "cubic_spline_resample: query outside the sampled span");

  SampledSeries out;
  out.timestamps.assign(query_times.begin(), query_times.end());
  out.values = DenseMatrix(query_times.size(), fine.dims());
  std::vector<double> col(fine.length());
  for (std::size_t j = 0; j < fine.dims(); ++j) {
    for (std::size_t i = 0; i < fine.length(); ++i) col[i] = fine.values(i, j);
    const Spline sp = fit_spline(fine.timestamps, col);
    for (std::size_t q = 0; q < query_times.size(); ++q)
      out.values(q, j) = sp.eval(query_times[q]);
  }
  return out;
}

SampledSeries irregularize_mg(const SampledSeries& fine, double pi,
                              std::uint64_t seed, std::size_t n_samples) {
  if (pi < 0.0 || pi >= 1.0)
    throw std::invalid_argument("irregularize_mg: pi must lie in [0, 1)");
  if (n_samples < 2)
    throw std::invalid_argument("irregularize_mg: need >= 2 samples");

  // One base draw sequence per seed; pi only rescales it, so sweeps over
  // pi reuse the same randomness.
  RngStream rng(seed);
  std::vector<double> q(n_samples);
  q[0] = fine.timestamps.front();
  for (std::size_t i = 1; i < n_samples; ++i) {
    const double u = rng.next_unit();                  // [0, 1)
    const double gap = (1.0 + pi) - 2.0 * pi * u;      // (1-pi, 1+pi]
    q[i] = q[i - 1] + gap;
  }
  return cubic_spline_resample(fine, q);
}

}  // namespace tarnn
