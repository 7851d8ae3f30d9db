#pragma once

#include <span>
#include <vector>

#include "tarnn/matrix.hpp"
#include "tarnn/rng.hpp"
#include "tarnn/series.hpp"
#include "tarnn/timegrid.hpp"

namespace tarnn {

enum class GatedVariant { GRU, GRUT, TAGRU };
enum class GatedLoss { CrossEntropy, MeanSquaredError };

struct GatedConfig {
  GatedVariant variant = GatedVariant::GRU;
  std::size_t n_hidden = 100;
  std::size_t n_in = 1;
  std::size_t n_out = 1;
  TimeTransform transform;    // GRUT input feature / TAGRU state mix
  bool raw_dt_input = false;  // GRUT: feed the raw gap instead of f(gap)
};

// Fully trainable gated recurrent network. Input matrices carry a leading
// bias column; GRUT carries one extra input column for the time gap, which
// is the only parameter-count difference across variants.
struct GatedModel {
  GatedConfig cfg;
  DenseMatrix w_z, u_z;   // update gate
  DenseMatrix w_r, u_r;   // reset gate
  DenseMatrix w_h, u_h;   // candidate state
  DenseMatrix w_out;      // [n_out x (1 + n_hidden)]

  std::size_t n_in_eff() const {
    return cfg.n_in + (cfg.variant == GatedVariant::GRUT ? 1 : 0);
  }
  std::size_t param_count() const;
};

struct GateRecord {
  Vector z, r, candidate;
};

struct GatedGrads {
  DenseMatrix w_z, u_z, w_r, u_r, w_h, u_h, w_out;
  double global_norm() const;
};

// Per-step tensors kept from the forward pass for backpropagation through
// time. Batched layout: row b of each [B x ...] block belongs to sequence b.
struct ForwardCache {
  std::size_t batch = 0, len = 0;
  std::vector<DenseMatrix> x;       // [B x (1+n_in_eff)] per step
  std::vector<DenseMatrix> h;       // [B x H] per step, plus h[-1] at index 0
  std::vector<DenseMatrix> z, r, c; // gate activations per step
  std::vector<Vector> dt;           // per-sequence effective step, per step
};

struct ForwardResult {
  DenseMatrix outputs;  // [len x n_out] (single) / last-step [B x n_out]
  ForwardCache cache;
};

GatedModel init_gated(const GatedConfig& cfg, RngStream& rng);

// One update. dt_effective must lie in (0, 1] for TAGRU; it is ignored by
// GRU and appended to the input for GRUT.
Vector gated_step(const GatedModel& m, std::span<const double> h_prev,
                  std::span<const double> x, double dt_effective,
                  GateRecord* record = nullptr);

// Full pass over one series; outputs row n is W_out [1; h_n].
ForwardResult forward(const GatedModel& m, const SampledSeries& series);

// Exact reverse-mode gradients through the unrolled recurrence. The time
// gaps are constants: nothing is differentiated toward them.
GatedGrads backward(const GatedModel& m, const ForwardCache& cache,
                    const DenseMatrix& output_grads);

struct TrainConfig {
  GatedLoss loss = GatedLoss::CrossEntropy;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double grad_clip = 5.0;   // global-norm threshold
  std::uint64_t seed = 0;
  std::size_t val_tail = 0;  // MSE: score validation on the last K steps only
  bool verbose = false;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;  // accuracy (classification) or RMSE (regression)
};

struct TrainResult {
  GatedModel model;  // snapshot with the best validation loss
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
};

// Adam + BPTT. Classification reads the last step's logits; regression is
// per-step MSE against series.targets. Throws on divergence.
TrainResult train(const GatedModel& m, std::span<const SampledSeries> train_set,
                  std::span<const SampledSeries> val_set, const TrainConfig& cfg);

// Forward-only evaluation helpers.
double classification_accuracy(const GatedModel& m,
                               std::span<const SampledSeries> items);

// Mean loss over items; for MSE a nonzero tail restricts scoring to each
// sequence's final `tail` steps (teacher-forced context still runs).
double evaluate_loss(const GatedModel& m, std::span<const SampledSeries> items,
                     GatedLoss loss, std::size_t tail = 0);
int classify(const GatedModel& m, const SampledSeries& series);

// Regression: model outputs for one series (one row per step).
DenseMatrix predict_sequence(const GatedModel& m, const SampledSeries& series);

// Closed-loop continuation for regression models: outputs are fed back as
// the next input, stepping over the supplied gaps.
SampledSeries run_generative(const GatedModel& m, const SampledSeries& primer,
                             std::span<const double> horizon_deltas);

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path);

const char* to_string(GatedVariant v);
GatedVariant gated_variant_from_string(const std::string& s);

}  // namespace tarnn
