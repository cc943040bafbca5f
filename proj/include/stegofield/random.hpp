#pragma once

#include <cstdint>
#include <random>

namespace stegofield {

// std::uniform_*_distribution is implementation-defined, so the mappings from
// raw engine output are spelled out here to keep seeded runs portable.
using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = n == 0 ? 0 : (~std::uint64_t{0} - n + 1) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= limit) return r % n;
    }
}

/// Uniform integer in [lo, hi], inclusive.
inline std::uint64_t uniform_between(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
    return lo + uniform_index(rng, hi - lo + 1);
}

inline float uniform_symmetric(Rng& rng, float scale) {
    return static_cast<float>((2.0 * uniform01(rng) - 1.0) * scale);
}

}  // namespace stegofield
