#pragma once

#include <cstdint>
#include <random>

namespace deepdim {

using Rng = std::mt19937_64;

/// Independent generator for item `index` of a stream keyed by `seed`.
/// Items can then be produced in any order, or in parallel, with identical
/// results.
inline Rng substream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(domain >> 32)};
  return Rng(seq);
}

} // namespace deepdim
