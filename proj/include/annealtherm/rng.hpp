#pragma once

#include <cstdint>
#include <random>

namespace annealtherm {

// Uniform doubles are generated directly from the mt19937_64 stream instead
// of through std::uniform_real_distribution, whose output is
// implementation-defined. Results must be identical across platforms.

inline double uniform_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

inline int uniform_sign(std::mt19937_64& rng) { return (rng() >> 63) ? 1 : -1; }

/// splitmix64 mix; used to derive independent per-task seeds from a master
/// seed so that parallel scheduling never changes results.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace annealtherm
