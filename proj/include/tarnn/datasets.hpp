#pragma once

#include <string>
#include <vector>

#include "tarnn/rng.hpp"
#include "tarnn/series.hpp"

namespace tarnn {

struct LabeledSet {
  std::vector<SampledSeries> items;
  int n_classes = 0;
  std::vector<std::string> warnings;  // unexpected counts/lengths, etc.
};

// Archive text format: one sample per line, class label first, then the
// per-step values, separated by commas or whitespace. Labels 1..K are
// remapped to 0..K-1; timestamps are the implicit indices 0..L-1.
LabeledSet load_label_first_archive(const std::string& path);

struct UWaveData {
  LabeledSet train, test;
};

// Loads the gesture archive pair and cross-checks the published counts
// (890 train / 3580 test, 8 classes); mismatches are recorded as warnings,
// not errors, since archive revisions differ.
UWaveData load_uwave(const std::string& train_path, const std::string& test_path);

void write_label_first_archive(const LabeledSet& set, const std::string& path);

// Keeps ceil(fraction*L) indices drawn uniformly without replacement, in
// ascending order; retained rows keep their original timestamps, so the
// gaps are the index differences.
SampledSeries subsample_random_fraction(const SampledSeries& s, double fraction,
                                        RngStream& rng);

// Two-column "t,value" CSV (header optional). Rows are sorted by t, then
// validated; duplicate timestamps and non-numeric cells are errors.
SampledSeries load_timestamped_csv(const std::string& path);

// Linear interpolation onto the regular grid t0, t0+dt, ... <= t_last.
SampledSeries regularize_by_interpolation(const SampledSeries& s, double target_dt);

// Linear interpolation at arbitrary times inside the sampled span (the
// inverse direction of the regularizer).
SampledSeries linear_interpolate_at(const SampledSeries& s,
                                    std::span<const double> times);

struct TemporalFold {
  std::size_t val_begin = 0, val_end = 0;  // training view is [0, val_begin)
};

// Consecutive non-overlapping validation folds over a training region,
// forward-chaining style.
std::vector<TemporalFold> temporal_cv_folds(std::size_t region_len,
                                            std::size_t fold_len);

struct HoldoutSplit {
  std::vector<std::size_t> train, val;
  double val_fraction = 0.0;
  std::uint64_t seed = 0;
};

HoldoutSplit split_holdout(std::size_t n, double val_fraction, std::uint64_t seed);

// Synthetic stand-ins, used when the real archives are not on disk. Both
// are fixed-recipe generators so runs are reproducible from the seed.

// Eight smooth gesture-like waveform classes, z-normalized per sample.
LabeledSet make_gesture_standin(std::size_t n_samples, std::size_t length,
                                std::uint64_t seed);

// Timestamped univariate series with a slow trend, several oscillations
// and lognormal sampling gaps, mimicking dated-proxy records.
SampledSeries make_cave_standin(std::size_t n, std::uint64_t seed);

}  // namespace tarnn
