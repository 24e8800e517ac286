#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace qsel {

/// Seeded random stream used by every stochastic step.
///
/// Draws are derived from the raw std::mt19937_64 output rather than the
/// <random> distributions, whose algorithms are implementation-defined, so a
/// given seed yields the same sequence with any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform in [lo, hi].
  double uniform(double lo, double hi);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qsel
