#pragma once

#include <cstdint>
#include <random>

namespace roundstat {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 1;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Independent stream for trial `trial` of grid point `grid`; depends only on
// the three counters, never on scheduling.
Rng make_stream(std::uint64_t master_seed, std::uint64_t grid, std::uint64_t trial);

}  // namespace roundstat
