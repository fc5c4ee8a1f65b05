#pragma once

#include <cstdint>
#include <random>

namespace peergroups {

using Rng = std::mt19937_64;

struct RngSeed {
  std::uint64_t value = 0;
};

/// SplitMix64 finalizer. Used to derive independent sub-streams from a
/// (seed, index) pair so that parallel work units never share a stream.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr RngSeed derive_seed(RngSeed base, std::uint64_t stream) noexcept {
  return RngSeed{mix64(base.value ^ mix64(stream + 0x632be59bd9b4e019ULL))};
}

inline Rng make_rng(RngSeed seed) { return Rng{mix64(seed.value)}; }

}  // namespace peergroups
