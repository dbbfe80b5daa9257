#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ecpe {

/// Seeded generator used everywhere randomness is needed. Distributions are
/// derived from the raw 64-bit engine output so sequences are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Knuth's multiplication method; adequate for the small means used here.
  int poisson(double mean);

  /// Independent stream derived from this generator's seed material.
  Rng fork(std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

/// Deterministic seed mixing (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace ecpe
