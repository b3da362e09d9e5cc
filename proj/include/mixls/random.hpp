#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mixls {

// 53-bit uniform in [0, 1). mt19937_64 output is fully specified by the
// standard, so draws are reproducible across platforms (the std::*
// distribution adapters are not).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1], safe as a log() argument.
inline double uniform01_open(std::mt19937_64& rng) {
    return 1.0 - uniform01(rng);
}

// Standard normal via Box-Muller (cosine branch; consumes two uniforms).
inline double standard_normal(std::mt19937_64& rng) {
    const double u1 = uniform01_open(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable seed derivation for independent work items.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return mix64(base ^ mix64(a + 0x632be59bd9b4e019ULL) ^ mix64(b + 0x9e6c63d0876a9a47ULL));
}

}  // namespace mixls
