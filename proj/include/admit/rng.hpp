#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace admit {

// All randomness flows through 64-bit Mersenne Twister engines whose seeds are
// derived with SplitMix64, so every replication owns an independent stream
// that depends only on (base seed, index, stream id).
using Rng = std::mt19937_64;

inline constexpr std::string_view kRngName = "mt19937_64+splitmix64";

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index,
                                           std::uint64_t stream = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ index) ^ (stream * 0xD1B54A32D192ED03ull));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace admit
