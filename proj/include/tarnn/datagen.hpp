#pragma once

#include <array>

#include "tarnn/rng.hpp"
#include "tarnn/series.hpp"

namespace tarnn {

struct LorenzConfig {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  std::array<double, 3> initial = {1.0, 1.0, 1.0};
  std::size_t n_steps = 10000;
  double pi = 0.0;        // irregularity half-width of the gap distribution
  double base_dt = 0.01;
  std::uint64_t seed = 0;
  std::size_t transient = 1000;  // discarded steps at base_dt
};

struct MackeyGlassConfig {
  double beta = 0.2;
  double n_exp = 10.0;
  double gamma = 0.1;
  double tau = 17.0;
  double fine_dt = 0.01;
  double history = 1.2;   // constant pre-history value
  std::size_t n_steps = 100000;
  std::size_t transient = 10000;
};

// Lorenz attractor integrated with classical RK4, one step per sampled
// irregular gap; timestamps are the cumulative gaps.
SampledSeries generate_lorenz(const LorenzConfig& cfg);

// Delay differential equation on a fine regular grid; delayed values come
// from linear interpolation in a ring-buffer history.
SampledSeries generate_mackey_glass(const MackeyGlassConfig& cfg);

// Natural cubic spline fitted per dimension over the input grid, evaluated
// at the query times. Queries outside the spanned interval throw.
SampledSeries cubic_spline_resample(const SampledSeries& fine,
                                    std::span<const double> query_times);

// Irregular resampling of a fine-grid series with unit-mean gaps drawn on
// (1-pi, 1+pi]. The underlying uniform draws depend only on the seed, so
// different pi values rescale the same randomness.
SampledSeries irregularize_mg(const SampledSeries& fine, double pi,
                              std::uint64_t seed, std::size_t n_samples);

}  // namespace tarnn
