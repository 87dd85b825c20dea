#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace otl {

/// Seeded generator with distribution code fixed here rather than in the
/// standard library, so sampled sequences are identical across toolchains.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  double angle() { return uniform(0.0, 2.0 * std::numbers::pi); }
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

private:
  std::mt19937_64 engine_;
};

} // namespace otl
