#pragma once

#include <span>
#include <string>
#include <vector>

#include "tarnn/rng.hpp"

namespace tarnn {

enum class TimeScale { Linear, Exp };

// Maps raw time gaps to the effective step size fed into the state update.
// Linear divides by a normalization constant (the training-set maximum) and
// clips test-time gaps that exceed it, keeping the effective step in [0, 1].
// Exp applies 1 - exp(-dt/scale), which is bounded in [0, 1) by itself.
struct TimeTransform {
  TimeScale kind = TimeScale::Linear;
  double norm = 1.0;  // max training gap (Linear) or timescale divisor (Exp)

  double apply(double delta) const;
};

TimeTransform fit_transform(TimeScale kind, std::span<const double> training_deltas,
                            double exp_scale = 1.0);

// Consecutive gaps of a strictly increasing timestamp vector.
std::vector<double> deltas_from_timestamps(std::span<const double> t);

// i.i.d. gaps uniform on (max(0, base - pi), base + pi].
std::vector<double> sample_irregular_steps(double pi, double base, std::size_t n,
                                           RngStream& rng);

const char* to_string(TimeScale k);
TimeScale timescale_from_string(const std::string& s);

}  // namespace tarnn
