#pragma once

// Shared machinery for the experiment harness: base-weight caching so a
// grid over (alpha, radius, input_scaling, lambda) re-measures each seed's
// spectral radius only once, and the shifted/normalized view a prediction
// task runs on.

#include <map>
#include <tuple>

#include "tarnn/bench.hpp"
#include "tarnn/numerics.hpp"
#include "tarnn/reservoir.hpp"
#include "tarnn/series.hpp"

namespace tarnn::bench {

// Draws unscaled reservoir weights once per (seed, n_units, n_aug) and
// reuses them for every grid cell: rescaling a fixed base matrix to each
// target radius is exact, so a cell differs from init_reservoir only by
// rounding in the scale factor.
class ReservoirFactory {
 public:
  ReservoirModel make(const ReservoirConfig& cfg, std::uint64_t seed) {
    const std::size_t n_aug =
        1 + cfg.n_in + (cfg.variant == ReservoirVariant::ESNT ? 1 : 0);
    const Key key{seed, cfg.n_units, n_aug};
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      RngStream rng(seed);
      Base b;
      b.w_in = random_uniform_matrix(cfg.n_units, n_aug, 1.0, rng);
      b.u = random_uniform_matrix(cfg.n_units, cfg.n_units, 1.0, rng);
      b.rho = spectral_radius(b.u);
      it = cache_.emplace(key, std::move(b)).first;
    }
    const Base& b = it->second;
    ReservoirModel m;
    m.cfg = cfg;
    m.w_in = b.w_in;
    m.w_in *= cfg.input_scaling;
    m.u = b.u;
    m.u *= cfg.radius / b.rho;
    return m;
  }

 private:
  struct Base {
    DenseMatrix w_in, u;
    double rho = 0.0;
  };
  using Key = std::tuple<std::uint64_t, std::size_t, std::size_t>;
  std::map<Key, Base> cache_;
};

// One-step prediction view of a raw series: normalized on the train rows,
// shifted so each input is the previous observation.
struct PredictTask {
  SampledSeries shifted;  // with targets
  Normalizer norm;
  std::size_t train_end = 0;  // shifted-row index ranges
  std::size_t val_end = 0;
};

inline PredictTask make_predict_task(const SampledSeries& raw,
                                     double train_frac, double val_frac) {
  PredictTask t;
  const std::size_t n = raw.length();
  const auto train_raw = static_cast<std::size_t>(train_frac * static_cast<double>(n));
  t.norm = fit_normalizer(raw, 0, train_raw);
  t.shifted = shift_for_prediction(apply_normalizer(t.norm, raw));
  t.train_end = train_raw > 0 ? train_raw - 1 : 0;
  t.val_end = static_cast<std::size_t>((train_frac + val_frac) *
                                       static_cast<double>(n));
  t.val_end = std::min(t.val_end, t.shifted.length());
  return t;
}

inline TimeTransform fit_task_transform(TimeScale kind, const PredictTask& t,
                                        double exp_scale = 1.0) {
  const auto deltas = t.shifted.deltas();
  std::span<const double> train_deltas(deltas.data(),
                                       std::min(t.train_end, deltas.size()));
  return fit_transform(kind, train_deltas, exp_scale);
}

}  // namespace tarnn::bench
