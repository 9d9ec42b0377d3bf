#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace drt {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; good avalanche for deriving independent streams.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed for a sub-stream identified by a path of integers below `seed`.
// derive_seed(s, {a, b}) differs from derive_seed(s, {b, a}).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng{mix64(seed)}; }

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return Rng{derive_seed(seed, path)};
}

// Uniform integer in [0, bound). Lemire's multiply-shift with rejection, so
// results do not depend on the standard library's distribution internals.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Standard normal draw (Marsaglia polar method).
double standard_normal(Rng& rng);

}  // namespace drt
