#pragma once

#include "penreg/types.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace penreg {

/// Portable seeded generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard library distributions are not (their algorithms
/// are implementation-defined), so bounded integers, uniforms and normals
/// are derived here from raw engine output:
///   - uniform(): top 53 bits of one draw, scaled to [0, 1)
///   - below(n): rejection sampling on the largest multiple of n
///   - normal(): Marsaglia polar method, second variate cached
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Index below(Index n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Seed used when the caller does not supply one.
std::uint64_t entropy_seed();

/// Fisher-Yates shuffle of 0..n-1 driven by Rng(seed).
IndexList permutation(Index n, std::uint64_t seed);

}  // namespace penreg
