#pragma once

#include <cstdint>
#include <random>

namespace ccbox {

/// Seeded random stream. One instance per run; never shared across threads.
///
/// Uniform variates are built from the raw 64-bit engine output so that the
/// stream is identical across standard library implementations; Gaussian and
/// Poisson variates use the standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Child stream for item `index` of a batch seeded by `master`.
  static Rng derive(std::uint64_t master, std::uint64_t index) { return Rng(derive_seed(master, index)); }
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal(double mean, double sigma) {
    std::normal_distribution<double> dist(mean, sigma);
    return dist(engine_);
  }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(engine_);
  }

  std::mt19937_64 &engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ccbox
