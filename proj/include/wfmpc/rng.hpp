#pragma once

#include <cmath>
#include <cstdint>

namespace wfmpc {

// Counter-based pseudo-random numbers. Every draw is a pure function of
// (seed, stream, index), so independent streams (per turbine, per purpose)
// can be sampled in any order without shared state. Mixing is SplitMix64.

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

inline std::uint64_t rng_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t key = detail::mix64(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
  return detail::mix64(key + 0x9E3779B97F4A7C15ull * (index + 1));
}

// Uniform on (0,1]; never returns 0 so log() is safe.
inline double rng_u01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return ((rng_u64(seed, stream, index) >> 11) + 1) * (1.0 / 9007199254740992.0);
}

// Standard normal via Box-Muller (cosine branch). Draw n consumes the
// uniform pair at indices (2n, 2n+1) of the same stream.
inline double rng_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  double u1 = rng_u01(seed, stream, 2 * index);
  double u2 = rng_u01(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace wfmpc
