#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace msc {

// All randomness flows through mt19937_64 plus the helpers below. The
// standard library distributions are implementation-defined, so they are
// avoided everywhere results must be reproducible byte-for-byte.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Independent per-stream seed from a base seed (used for per-tree RNGs).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base;
    (void)splitmix64(s);
    s ^= 0x6a09e667f3bcc909ull + stream * 0x9e3779b97f4a7c15ull;
    return splitmix64(s);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_real(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n) without modulo bias.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n <= 1) {
        if (n == 1) return 0;
        return 0;  // callers guard n >= 1
    }
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

// Standard normal via Box-Muller (fixed two-draw consumption per call).
inline double normal(Rng& rng) {
    const double u1 = 1.0 - uniform_real(rng);  // (0, 1]
    const double u2 = uniform_real(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// k distinct indices from [0, n), partial Fisher-Yates, order randomized.
inline std::vector<int> sample_without_replacement(Rng& rng, int n, int k) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_index(rng, static_cast<std::size_t>(n - i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        out.push_back(pool[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace msc
