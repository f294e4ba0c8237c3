#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace moe {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-mode seed for stream `index` under `master_seed`; independent of
/// the order in which streams are requested.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return mix64(mix64(master_seed) ^ mix64(index + 0xD1B54A32D192ED03ULL));
}

inline void fill_standard_normal(std::span<double> out, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out) v = normal(rng);
}

}  // namespace moe
