#pragma once

#include <cstdint>
#include <random>

namespace qi {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent worker/repetition
/// streams from a master seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix_seed(mix_seed(master) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
    return Rng(derive_seed(master, stream));
}

/// Uniform real in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

}  // namespace qi
