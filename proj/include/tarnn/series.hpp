#pragma once

#include <optional>
#include <string>

#include "tarnn/matrix.hpp"

namespace tarnn {

// Timestamped multivariate sequence; the data currency shared by the
// generators, loaders, models, and the benchmark harness.
struct SampledSeries {
  std::vector<double> timestamps;        // strictly increasing
  DenseMatrix values;                    // [n_steps x n_dims]
  std::optional<int> label;              // class id for labeled sets
  std::optional<DenseMatrix> targets;    // [n_steps x n_targets]

  std::size_t length() const { return timestamps.size(); }
  std::size_t dims() const { return values.cols(); }

  // Throws when timestamps are not strictly increasing, sizes disagree,
  // or values are non-finite.
  void validate() const;

  std::vector<double> deltas() const;
};

// One-step-ahead task view of a raw series: the model input at step n is
// the previous observation, the timestamp is the time being predicted, and
// the target is the observation at that time. The state update therefore
// integrates over exactly the gap it is about to be scored on.
SampledSeries shift_for_prediction(const SampledSeries& raw);

// Row range [begin, end) copied out with targets and label.
SampledSeries slice_rows(const SampledSeries& s, std::size_t begin,
                         std::size_t end);

// Zero-mean / unit-variance scaling fitted on a sample range.
struct Normalizer {
  Vector mean, stddev;
};
Normalizer fit_normalizer(const SampledSeries& s, std::size_t first, std::size_t last);
SampledSeries apply_normalizer(const Normalizer& n, const SampledSeries& s);
void denormalize_values(const Normalizer& n, DenseMatrix& values);

// Canonical CSV: header "t,x0[,x1,...]", 17-significant-digit floats.
// An optional ".meta.json" sidecar carries the label.
void write_series_csv(const SampledSeries& s, const std::string& path);
SampledSeries read_series_csv(const std::string& path);

}  // namespace tarnn
