#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cardlab {

// std::mt19937_64's output sequence is fixed by the standard, but the std
// distributions are not; these helpers keep generated data identical across
// standard libraries.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double unit_uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n), unbiased (rejection sampling).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = n == 0 ? 0 : (~std::uint64_t{0} - (~std::uint64_t{0} % n));
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

inline bool bernoulli(Rng& rng, double p) { return unit_uniform(rng) < p; }

/// Exponential draw with the given rate.
inline double exponential(Rng& rng, double rate) { return -std::log1p(-unit_uniform(rng)) / rate; }

/// Stable child seed from (master, stream) via splitmix64 so parallel tasks
/// never share a stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace cardlab
