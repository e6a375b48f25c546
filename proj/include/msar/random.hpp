#pragma once

#include <cstdint>
#include <random>

namespace msar {

// Independent RNG streams derived from one experiment seed.
enum class SeedStream : std::uint64_t {
  geometry = 1,
  waveform = 2,
  scene = 3,
  noise = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, SeedStream stream) {
  return splitmix64(base * 0x100000001b3ULL + static_cast<std::uint64_t>(stream));
}

using Rng = std::mt19937_64;

}  // namespace msar
