#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dadmm {

using Rng = std::mt19937_64;

// Derives an independent seed for a named substream ("topology", "U", ...)
// so changing how one generator consumes randomness leaves the others intact.
std::uint64_t substream_seed(std::uint64_t master, std::string_view stream);

inline Rng make_rng(std::uint64_t master, std::string_view stream) {
  return Rng(substream_seed(master, stream));
}

// 64-bit FNV-1a, used for content fingerprints in file names and CSV keys.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace dadmm
