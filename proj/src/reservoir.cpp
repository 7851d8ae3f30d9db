#include "tarnn/reservoir.hpp"

#include <cmath>
#include <stdexcept>

#include "tarnn/kernels.hpp"

namespace tarnn {
namespace {

constexpr double kDtSlack = 1e-12;

// [1; x; (dt)] with the bias slot first; ESNT gets the transformed gap as
// its last input column.
void build_aug(const ReservoirModel& m, std::span<const double> x,
               double dt_effective, Vector& aug) {
  const std::size_t n_raw = m.cfg.n_in;
  aug.resize(1 + m.n_in_eff());
  aug[0] = 1.0;
  for (std::size_t i = 0; i < n_raw; ++i) aug[1 + i] = x[i];
  if (m.cfg.variant == ReservoirVariant::ESNT) aug[1 + n_raw] = dt_effective;
}

double effective_dt(const ReservoirModel& m, double raw_delta) {
  if (m.cfg.variant == ReservoirVariant::ESN) return 1.0;
  return m.cfg.transform.apply(raw_delta);
}

Vector readout_from(const ReservoirModel& m, std::span<const double> aug,
                    std::span<const double> h) {
  Vector feat(m.n_features());
  std::copy(aug.begin(), aug.end(), feat.begin());
  std::copy(h.begin(), h.end(), feat.begin() + aug.size());
  return matvec(m.w_out, feat);
}

}  // namespace

ReservoirModel init_reservoir(const ReservoirConfig& cfg, RngStream& rng) {
  if (cfg.n_units < 1)
    throw std::invalid_argument("init_reservoir: n_units must be >= 1");
  if (!(cfg.radius > 0.0))
    throw std::invalid_argument("init_reservoir: radius must be > 0");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
    throw std::invalid_argument("init_reservoir: alpha must be in (0, 1]");
  if (cfg.input_scaling < 0.0)
    throw std::invalid_argument("init_reservoir: negative input scaling");

  ReservoirModel m;
  m.cfg = cfg;
  const std::size_t n_aug =
      1 + cfg.n_in + (cfg.variant == ReservoirVariant::ESNT ? 1 : 0);
  m.w_in = random_uniform_matrix(cfg.n_units, n_aug, cfg.input_scaling, rng);
  DenseMatrix u = random_uniform_matrix(cfg.n_units, cfg.n_units, 1.0, rng);
  m.u = scale_to_radius(u, cfg.radius);
  return m;
}

Vector step(const ReservoirModel& m, std::span<const double> h_prev,
            std::span<const double> x, double dt_effective) {
  const std::size_t n = m.cfg.n_units;
  if (h_prev.size() != n) throw std::invalid_argument("step: state size mismatch");
  if (x.size() != m.cfg.n_in)
    throw std::invalid_argument("step: input size mismatch");

  double ad = m.cfg.alpha;
  if (m.cfg.variant == ReservoirVariant::TAESN) {
    ad = m.cfg.alpha * dt_effective;
    if (ad > 1.0 + kDtSlack)
      throw std::invalid_argument(
          "step: alpha*dt exceeds 1, discretization invalid");
    if (ad == 0.0) return Vector(h_prev.begin(), h_prev.end());
  }

  Vector aug;
  build_aug(m, x, dt_effective, aug);
  Vector drive = matvec(m.w_in, aug);
  kern::active().gemv(m.u.data(), n, h_prev.data(), drive.data(), n, n);
  for (double& v : drive) v = std::tanh(v);

  Vector h(h_prev.begin(), h_prev.end());
  kern::active().leaky_mix(n, ad, h.data(), drive.data());
  return h;
}

StateTrajectory run_teacher_forced(const ReservoirModel& m,
                                   const SampledSeries& series) {
  if (series.dims() != m.cfg.n_in)
    throw std::invalid_argument("run_teacher_forced: input dim mismatch");
  const std::size_t len = series.length();
  if (len == 0) throw std::invalid_argument("run_teacher_forced: empty series");

  StateTrajectory traj;
  traj.states = DenseMatrix(len, m.cfg.n_units);
  if (len == 1) return traj;

  const auto deltas = series.deltas();
  Vector h(m.cfg.n_units, 0.0);
  for (std::size_t i = 1; i < len; ++i) {
    h = step(m, h, series.values.row(i), effective_dt(m, deltas[i - 1]));
    std::copy(h.begin(), h.end(), traj.states.row(i).begin());
  }
  return traj;
}

namespace {

// Feature matrix [n_features x n_kept] whose columns are [1; x_n; h_n] for
// n = washout+1 .. len-1 (the zero-state first row never trains a readout
// when washout >= 1; with washout == 0 it is included with dt = 1).
DenseMatrix feature_columns(const ReservoirModel& m, const SampledSeries& series,
                            const StateTrajectory& traj, std::size_t washout,
                            std::size_t* first_kept) {
  const std::size_t len = series.length();
  if (washout >= len)
    throw std::invalid_argument("washout must be smaller than series length");
  const std::size_t start = washout;
  const std::size_t kept = len - start;
  const std::vector<double> deltas =
      len >= 2 ? series.deltas() : std::vector<double>{};

  DenseMatrix f(m.n_features(), kept);
  Vector aug;
  for (std::size_t n = start; n < len; ++n) {
    const double dt_eff = n == 0 ? 1.0 : effective_dt(m, deltas[n - 1]);
    build_aug(m, series.values.row(n), dt_eff, aug);
    const std::size_t col = n - start;
    for (std::size_t i = 0; i < aug.size(); ++i) f(i, col) = aug[i];
    const auto h = traj.states.row(n);
    for (std::size_t i = 0; i < h.size(); ++i) f(aug.size() + i, col) = h[i];
  }
  *first_kept = start;
  return f;
}

}  // namespace

ReadoutFit train_readout(const ReservoirModel& m, const SampledSeries& series,
                         const DenseMatrix& targets, double lambda,
                         std::size_t washout) {
  if (targets.rows() != series.length())
    throw std::invalid_argument("train_readout: target row count mismatch");

  const StateTrajectory traj = run_teacher_forced(m, series);
  std::size_t start = 0;
  const DenseMatrix f = feature_columns(m, series, traj, washout, &start);
  const std::size_t kept = f.cols();

  DenseMatrix t(targets.cols(), kept);
  for (std::size_t n = 0; n < kept; ++n)
    for (std::size_t j = 0; j < targets.cols(); ++j)
      t(j, n) = targets(start + n, j);

  ReadoutFit fit;
  fit.model = m;
  fit.model.w_out = ridge_solve(f, t, lambda);
  fit.model.trained = true;

  const DenseMatrix pred = matmul(fit.model.w_out, f);
  double se = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred.data()[i] - t.data()[i];
    se += e * e;
  }
  fit.train_rmse = std::sqrt(se / static_cast<double>(pred.size()));
  return fit;
}

SampledSeries run_generative(const ReservoirModel& m, const SampledSeries& primer,
                             std::span<const double> horizon_deltas) {
  if (!m.trained) throw std::logic_error("run_generative: model not trained");
  if (primer.length() == 0)
    throw std::invalid_argument("run_generative: empty primer");
  if (m.cfg.n_out != m.cfg.n_in)
    throw std::invalid_argument(
        "run_generative: feedback needs n_out == n_in");

  // Absorb the primer, then seed the loop with the model's own readout at
  // the primer's last row.
  Vector h(m.cfg.n_units, 0.0);
  const std::size_t plen = primer.length();
  double last_dt_eff = 1.0;
  if (plen >= 2) {
    const StateTrajectory traj = run_teacher_forced(m, primer);
    const auto last = traj.states.row(plen - 1);
    h.assign(last.begin(), last.end());
    last_dt_eff = effective_dt(m, primer.deltas().back());
  }

  Vector aug;
  build_aug(m, primer.values.row(plen - 1), last_dt_eff, aug);
  Vector value = readout_from(m, aug, h);
  double now = primer.timestamps.back();

  SampledSeries out;
  out.timestamps.reserve(horizon_deltas.size());
  out.values = DenseMatrix(horizon_deltas.size(), m.cfg.n_out);

  for (std::size_t k = 0; k < horizon_deltas.size(); ++k) {
    const double dt_eff = effective_dt(m, horizon_deltas[k]);
    h = step(m, h, value, dt_eff);
    build_aug(m, value, dt_eff, aug);
    value = readout_from(m, aug, h);
    now += horizon_deltas[k];
    out.timestamps.push_back(now);
    for (std::size_t j = 0; j < m.cfg.n_out; ++j) out.values(k, j) = value[j];
  }
  return out;
}

Vector pooled_features(const ReservoirModel& m, const SampledSeries& series,
                       std::size_t washout) {
  const StateTrajectory traj = run_teacher_forced(m, series);
  const std::size_t len = series.length();
  const std::size_t start = std::min(washout, len - 1);
  std::size_t first = 0;
  const DenseMatrix f = feature_columns(m, series, traj, start, &first);

  Vector pooled(m.n_features(), 0.0);
  if (m.cfg.pooling == Pooling::LastState) {
    for (std::size_t i = 0; i < pooled.size(); ++i)
      pooled[i] = f(i, f.cols() - 1);
    return pooled;
  }
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t c = 0; c < f.cols(); ++c) pooled[i] += f(i, c);
  const double inv = 1.0 / static_cast<double>(f.cols());
  for (double& v : pooled) v *= inv;
  return pooled;
}

DenseMatrix pooled_features_batch(const ReservoirModel& m,
                                  std::span<const SampledSeries> batch,
                                  std::size_t washout) {
  const std::size_t bsz = batch.size();
  if (bsz == 0) return DenseMatrix(m.n_features(), 0);
  const std::size_t len = batch[0].length();
  for (const auto& s : batch) {
    if (s.length() != len)
      throw std::invalid_argument("pooled_features_batch: unequal lengths");
    if (s.dims() != m.cfg.n_in)
      throw std::invalid_argument("pooled_features_batch: input dim mismatch");
  }
  const std::size_t n = m.cfg.n_units;
  const std::size_t n_aug = 1 + m.n_in_eff();
  const std::size_t start = std::min(washout, len - 1);
  const bool last_only = m.cfg.pooling == Pooling::LastState;

  // Per-sequence transformed gaps, defined from step 1 on.
  DenseMatrix dts(bsz, len, 1.0);
  for (std::size_t b = 0; b < bsz; ++b) {
    const auto deltas = batch[b].deltas();
    for (std::size_t i = 1; i < len; ++i)
      dts(b, i) = effective_dt(m, deltas[i - 1]);
  }

  DenseMatrix h(bsz, n);          // state rows
  DenseMatrix aug(bsz, n_aug);    // [1; x; (dt)] rows
  DenseMatrix drive(bsz, n);
  DenseMatrix pooled(m.n_features(), bsz);
  const auto& K = kern::active();

  // transposed weights turn the per-step products into blocked gemm_nn
  DenseMatrix w_in_t(n_aug, n), u_t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n_aug; ++j) w_in_t(j, i) = m.w_in(i, j);
    for (std::size_t j = 0; j < n; ++j) u_t(j, i) = m.u(i, j);
  }

  auto fill_aug = [&](std::size_t step_idx) {
    for (std::size_t b = 0; b < bsz; ++b) {
      aug(b, 0) = 1.0;
      for (std::size_t j = 0; j < m.cfg.n_in; ++j)
        aug(b, 1 + j) = batch[b].values(step_idx, j);
      if (m.cfg.variant == ReservoirVariant::ESNT)
        aug(b, 1 + m.cfg.n_in) = dts(b, step_idx);
    }
  };

  auto accumulate = [&](std::size_t step_idx) {
    if (last_only && step_idx + 1 != len) return;
    for (std::size_t b = 0; b < bsz; ++b) {
      for (std::size_t i = 0; i < n_aug; ++i) pooled(i, b) += aug(b, i);
      for (std::size_t i = 0; i < n; ++i) pooled(n_aug + i, b) += h(b, i);
    }
  };

  fill_aug(0);
  if (start == 0) accumulate(0);
  for (std::size_t i = 1; i < len; ++i) {
    fill_aug(i);
    drive.fill(0.0);
    K.gemm_nn(aug.data(), n_aug, w_in_t.data(), n, drive.data(), n, bsz,
              n_aug, n);
    K.gemm_nn(h.data(), n, u_t.data(), n, drive.data(), n, bsz, n, n);
    for (std::size_t p = 0; p < drive.size(); ++p)
      drive.data()[p] = std::tanh(drive.data()[p]);
    for (std::size_t b = 0; b < bsz; ++b) {
      double ad = m.cfg.alpha;
      if (m.cfg.variant == ReservoirVariant::TAESN) ad *= dts(b, i);
      K.leaky_mix(n, ad, &h(b, 0), &drive(b, 0));
    }
    if (i >= start) accumulate(i);
  }

  if (!last_only) {
    const double inv = 1.0 / static_cast<double>(len - start);
    pooled *= inv;
  }
  return pooled;
}

Vector classify_scores(const ReservoirModel& m, const SampledSeries& series,
                       std::size_t washout) {
  if (!m.trained) throw std::logic_error("classify_scores: model not trained");
  const Vector feat = pooled_features(m, series, washout);
  return matvec(m.w_out, feat);
}

int classify(const ReservoirModel& m, const SampledSeries& series,
             std::size_t washout) {
  const Vector scores = classify_scores(m, series, washout);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;  // ties keep the lowest index
  return static_cast<int>(best);
}

ReservoirModel train_classifier(const ReservoirModel& m,
                                std::span<const SampledSeries> train_set,
                                int n_classes, double lambda,
                                std::size_t washout) {
  if (train_set.empty())
    throw std::invalid_argument("train_classifier: empty training set");
  const std::size_t ns = train_set.size();
  const DenseMatrix f = pooled_features_batch(m, train_set, washout);

  DenseMatrix onehot(static_cast<std::size_t>(n_classes), ns);
  for (std::size_t s = 0; s < ns; ++s) {
    if (!train_set[s].label)
      throw std::invalid_argument("train_classifier: unlabeled sample");
    onehot(static_cast<std::size_t>(*train_set[s].label), s) = 1.0;
  }

  ReservoirModel out = m;
  out.cfg.n_out = static_cast<std::size_t>(n_classes);
  out.w_out = ridge_solve(f, onehot, lambda);
  out.trained = true;
  return out;
}

const char* to_string(ReservoirVariant v) {
  switch (v) {
    case ReservoirVariant::ESN: return "esn";
    case ReservoirVariant::TAESN: return "taesn";
    default: return "esnt";
  }
}

ReservoirVariant reservoir_variant_from_string(const std::string& s) {
  if (s == "esn") return ReservoirVariant::ESN;
  if (s == "taesn") return ReservoirVariant::TAESN;
  if (s == "esnt") return ReservoirVariant::ESNT;
  throw std::invalid_argument("unknown reservoir variant: " + s);
}

}  // namespace tarnn
