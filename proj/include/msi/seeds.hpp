#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace msi {

// Derives an independent RNG stream from one run seed and a purpose tag,
// e.g. derive_seed(seed, "gen:17") or derive_seed(seed, "init").
// FNV-1a over the seed bytes and the tag, then a splitmix64 finalizer.
// This rule is part of the reproducibility contract: the same seed and tag
// always name the same stream, on every platform.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

// Uniform double in [0, 1) from the top 53 bits of one draw. Used instead
// of std::uniform_real_distribution so streams do not depend on the
// standard library implementation.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Plain modulo of a 64-bit draw.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  return rng() % n;
}

// In-place Fisher-Yates shuffle with fully specified draws.
template <typename T>
void shuffle_inplace(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

// FNV-1a over arbitrary text; used for config hashes.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace msi
