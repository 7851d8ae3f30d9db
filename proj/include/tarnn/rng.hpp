#pragma once

#include <cstdint>

namespace tarnn {

// Counter-based generator built on the splitmix64 mixing function.
// The sequence is a pure function of the 64-bit seed, so draws are
// bit-identical across platforms and compilers. split() derives an
// independently-seeded stream, which is how grid cells and repetitions
// get decorrelated without any shared state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed), seed0_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * next_unit(); }

  // Uniform on (lo, hi]: the open end is at lo, matching interval
  // conventions used for time-step sampling.
  double uniform_open_low(double lo, double hi) {
    return hi - (hi - lo) * next_unit();
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Derive an independent stream keyed by `key`; deterministic in
  // (seed, key) and unaffected by draws made from this stream.
  RngStream split(std::uint64_t key) const {
    std::uint64_t z = seed0_ + 0x9E3779B97F4A7C15ull * (key + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return RngStream(z ^ (z >> 31));
  }

 private:
  std::uint64_t state_;
  std::uint64_t seed0_;
};

}  // namespace tarnn
