#pragma once

#include <cstdint>
#include <random>

namespace teamlab {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the stream identified by (master, a, b). Streams never share state.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(master) ^ (a + 1)) ^ (b + 0x51ed27ULL));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline int uniform_index(Rng& rng, int count) {
  return std::uniform_int_distribution<int>(0, count - 1)(rng);
}

}  // namespace teamlab
