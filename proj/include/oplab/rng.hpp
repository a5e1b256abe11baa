#pragma once

#include <cstdint>

namespace oplab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a stream id, so the
// per-population draws of one run never overlap.
inline constexpr std::uint64_t mix_seed(std::uint64_t seed,
                                        std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^
                    (0x9e3779b97f4a7c15ULL * (stream + 1)));
}

}  // namespace oplab
