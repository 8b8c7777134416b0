#pragma once

// Seeded random streams. The engine is std::mt19937_64; child streams are
// keyed by SplitMix64-mixed seeds so a (master seed, density, trial) triple
// always maps to the same stream. Uniform variates are built from raw engine
// output rather than <random> distributions, whose algorithms are
// implementation-defined.

#include <cstdint>
#include <random>
#include <stdexcept>

namespace c3run {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the child stream for one (density, trial) cell of a sweep.
constexpr std::uint64_t child_seed(std::uint64_t master, std::uint64_t n_nodes, std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(master) ^ n_nodes) ^ trial);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace c3run
