// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hazediff {

/// Deterministic random source. The mt19937_64 engine is pinned by the
/// standard, so equal seeds give equal raw streams everywhere; uniform
/// draws use only exactly-rounded IEEE ops on top of it. Gaussian draws go
/// through libm (log/cos) and are therefore deterministic per platform.
class SeededRng {
public:
  explicit SeededRng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be positive.
  uint64_t uniform_index(uint64_t n) {
    return static_cast<uint64_t>(uniform() * static_cast<double>(n));
  }

  /// Standard normal via Box-Muller; second draw of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - uniform(); // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  /// Independent stream for worker `index`, derived from this rng's seed.
  SeededRng fork(uint64_t index) const {
    // splitmix64 over (seed, index) so sibling streams are decorrelated.
    uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return SeededRng(z ^ (z >> 31));
  }

private:
  uint64_t seed_;
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

} // namespace hazediff
