#pragma once

#include <array>
#include <cstdint>

namespace mkedge::simd {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro128++ state for the stream keyed by (seed, start, path).
inline std::array<std::uint32_t, 4> stream_state(std::uint64_t seed, int start, std::uint64_t path) {
  std::uint64_t key = seed;
  key = splitmix64(key) ^ (static_cast<std::uint64_t>(start) * 0xd1b54a32d192ed03ULL);
  key = splitmix64(key) ^ path;
  std::uint64_t a = splitmix64(key);
  std::uint64_t b = splitmix64(key);
  std::array<std::uint32_t, 4> s{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                                 static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  if ((s[0] | s[1] | s[2] | s[3]) == 0) s[0] = 1;
  return s;
}

inline std::uint32_t rotl32(std::uint32_t x, int k) { return (x << k) | (x >> (32 - k)); }

inline std::uint32_t xoshiro128pp(std::array<std::uint32_t, 4>& s) {
  const std::uint32_t result = rotl32(s[0] + s[3], 7) + s[0];
  const std::uint32_t t = s[1] << 9;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl32(s[3], 11);
  return result;
}

}  // namespace mkedge::simd
