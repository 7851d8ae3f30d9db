#pragma once

#include <span>
#include <vector>

#include "tarnn/numerics.hpp"
#include "tarnn/series.hpp"
#include "tarnn/timegrid.hpp"

namespace tarnn {

enum class ReservoirVariant { ESN, TAESN, ESNT };
enum class Pooling { Mean, LastState };

struct ReservoirConfig {
  ReservoirVariant variant = ReservoirVariant::ESN;
  std::size_t n_units = 100;
  std::size_t n_in = 1;
  std::size_t n_out = 1;
  double alpha = 1.0;           // leaking rate, doubles as inverse time constant
  double radius = 0.9;          // target spectral radius of the recurrent matrix
  double input_scaling = 1.0;
  TimeTransform transform;      // used by TAESN (state mix) and ESNT (extra input)
  Pooling pooling = Pooling::Mean;
};

// Fixed random recurrent network with a trained linear readout. The input
// matrix carries a leading bias column; ESNT carries one extra input column
// for the transformed time gap. Immutable after training.
struct ReservoirModel {
  ReservoirConfig cfg;
  DenseMatrix w_in;   // [n_units x (1 + n_in_eff)]
  DenseMatrix u;      // [n_units x n_units], rescaled to cfg.radius
  DenseMatrix w_out;  // [n_out x (1 + n_in_eff + n_units)]; empty until trained
  bool trained = false;

  // Inputs as the update sees them: raw dims plus the gap column for ESNT.
  std::size_t n_in_eff() const {
    return cfg.n_in + (cfg.variant == ReservoirVariant::ESNT ? 1 : 0);
  }
  std::size_t n_features() const { return 1 + n_in_eff() + cfg.n_units; }
};

struct StateTrajectory {
  DenseMatrix states;  // [n_steps x n_units]; row 0 is the zero initial state
};

struct ReadoutFit {
  ReservoirModel model;
  double train_rmse = 0.0;
};

ReservoirModel init_reservoir(const ReservoirConfig& cfg, RngStream& rng);

// One state update. dt_effective is the transformed gap in (0, 1]; it is
// ignored by ESN, mixed into the leak for TAESN, and expected to already
// sit in x's last slot for ESNT (use step() via the run_* helpers unless
// you are assembling inputs yourself).
Vector step(const ReservoirModel& m, std::span<const double> h_prev,
            std::span<const double> x, double dt_effective);

// Drives the reservoir over a series: state row n is produced from input
// row n and the gap preceding it; the first observation keeps the zero
// state (no gap exists yet).
StateTrajectory run_teacher_forced(const ReservoirModel& m,
                                   const SampledSeries& series);

// Ridge regression of targets onto [1; x_n; h_n] for n > washout.
ReadoutFit train_readout(const ReservoirModel& m, const SampledSeries& series,
                         const DenseMatrix& targets, double lambda,
                         std::size_t washout);

// Teacher-forces the raw primer, then free-runs: each output becomes the
// next input, stepping over the supplied gaps. Returns the predicted
// series with timestamps continuing from the primer's last observation.
SampledSeries run_generative(const ReservoirModel& m, const SampledSeries& primer,
                             std::span<const double> horizon_deltas);

// Readout applied to features pooled over the post-washout steps.
Vector classify_scores(const ReservoirModel& m, const SampledSeries& series,
                       std::size_t washout);
int classify(const ReservoirModel& m, const SampledSeries& series,
             std::size_t washout);

// Pooled feature column used by the classifier (exposed for training).
Vector pooled_features(const ReservoirModel& m, const SampledSeries& series,
                       std::size_t washout);

// Batched pooled-feature extraction for equal-length sequences; one GEMM
// per step instead of a matvec per sequence. Bit-compatible with the
// per-sequence path.
DenseMatrix pooled_features_batch(const ReservoirModel& m,
                                  std::span<const SampledSeries> batch,
                                  std::size_t washout);

// One-shot classifier training: pooled features -> one-hot ridge readout.
ReservoirModel train_classifier(const ReservoirModel& m,
                                std::span<const SampledSeries> train_set,
                                int n_classes, double lambda,
                                std::size_t washout);

const char* to_string(ReservoirVariant v);
ReservoirVariant reservoir_variant_from_string(const std::string& s);

}  // namespace tarnn
