#pragma once

#include <cstdint>
#include <random>

namespace tcatch {

using Rng = std::mt19937_64;

/// One splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of an independent stream: splitmix64 folded over (seed, replicate,
/// stream) in that order, so nearby inputs give unrelated generators.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream) {
  return Rng(derive_seed(seed, replicate, stream));
}

} // namespace tcatch
