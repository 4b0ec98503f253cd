#pragma once

#include <cstdint>

namespace hetdet::rng {

// SplitMix64 step (Vigna's public-domain generator).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless hash of (seed, stream). Two SplitMix rounds are enough to
// decorrelate adjacent stream ids.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed ^ (0x632be59bd9b4e019ULL + 0x9e3779b97f4a7c15ULL * stream);
  (void)splitmix64(x);
  return splitmix64(x);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return mix(mix(seed, tag), index);
}

// Uniform double in [0, 1) from 64 random bits.
inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace hetdet::rng
