#include "tcatch/rng.hpp"

namespace tcatch {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream) {
  std::uint64_t state = seed;
  std::uint64_t out = splitmix64(state);
  state ^= replicate;
  out ^= splitmix64(state);
  state ^= stream * 0xD1B54A32D192ED03ULL;
  out ^= splitmix64(state);
  return out;
}

} // namespace tcatch
