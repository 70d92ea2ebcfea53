#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace polyg {

// Uniform draw over [0, n) by rejection on the raw 64-bit stream. Unlike
// std::uniform_int_distribution this is pinned to one algorithm, so seeded
// sequences are identical across standard libraries and platforms.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace polyg
