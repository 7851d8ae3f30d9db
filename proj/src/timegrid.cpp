#include "tarnn/timegrid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tarnn {

double TimeTransform::apply(double delta) const {
  if (!(delta >= 0.0))
    throw std::invalid_argument("TimeTransform::apply: delta must be >= 0");
  if (kind == TimeScale::Linear) return std::min(delta / norm, 1.0);
  return 1.0 - std::exp(-delta / norm);
}

TimeTransform fit_transform(TimeScale kind, std::span<const double> training_deltas,
                            double exp_scale) {
  if (training_deltas.empty())
    throw std::invalid_argument("fit_transform: empty delta sequence");
  TimeTransform tf;
  tf.kind = kind;
  if (kind == TimeScale::Linear) {
    double mx = 0.0;
    for (double d : training_deltas) mx = std::max(mx, d);
    if (!(mx > 0.0))
      throw std::invalid_argument("fit_transform: non-positive maximum delta");
    tf.norm = mx;
  } else {
    if (!(exp_scale > 0.0))
      throw std::invalid_argument("fit_transform: exp scale must be > 0");
    tf.norm = exp_scale;
  }
  return tf;
}

std::vector<double> deltas_from_timestamps(std::span<const double> t) {
  if (t.size() < 2)
    throw std::invalid_argument("deltas_from_timestamps: need >= 2 timestamps");
  std::vector<double> d(t.size() - 1);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double dt = t[i + 1] - t[i];
    if (dt == 0.0)
      throw std::invalid_argument("deltas_from_timestamps: duplicate timestamp");
    if (!(dt > 0.0))
      throw std::invalid_argument("deltas_from_timestamps: non-monotone timestamps");
    d[i] = dt;
  }
  return d;
}

std::vector<double> sample_irregular_steps(double pi, double base, std::size_t n,
                                           RngStream& rng) {
  if (!(base > 0.0))
    throw std::invalid_argument("sample_irregular_steps: base must be > 0");
  if (pi < 0.0)
    throw std::invalid_argument("sample_irregular_steps: pi must be >= 0");
  const double lo = std::max(0.0, base - pi);
  const double hi = base + pi;
  std::vector<double> d(n);
  for (double& x : d) x = rng.uniform_open_low(lo, hi);
  return d;
}

const char* to_string(TimeScale k) {
  return k == TimeScale::Linear ? "linear" : "exp";
}

TimeScale timescale_from_string(const std::string& s) {
  if (s == "linear") return TimeScale::Linear;
  if (s == "exp") return TimeScale::Exp;
  throw std::invalid_argument("unknown time scale: " + s);
}

}  // namespace tarnn
