#pragma once

#include <cstdint>
#include <random>

namespace promptgauge::detail {

// Uniform [0, 1) from the top 53 bits of one generator output. Avoids
// std::uniform_real_distribution so draws are identical across standard
// library implementations.
inline double unit_real(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased uniform integer in [0, n) via rejection of the short bucket.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    std::uint64_t draw = rng();
    while (draw < threshold) draw = rng();
    return draw % n;
}

}  // namespace promptgauge::detail
