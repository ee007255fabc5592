#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nsn/error.hpp"

namespace nsn {

// Deterministic random stream. The generator is splitmix64 and every
// distribution below is implemented on top of its raw 64-bit output, so a
// given seed produces the same draw sequence on every platform and standard
// library. One stream per work item; streams are never shared across threads.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed), seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53 bits.
    double uniform_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased integer in [lo, hi], both inclusive. Lemire's method with
    // rejection on the biased slice.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        require(lo <= hi, Errc::invalid_argument, "uniform_int: lo > hi");
        const std::uint64_t range =
            static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit span
        std::uint64_t x = next_u64();
        unsigned __int128 m = static_cast<unsigned __int128>(x) * range;
        auto low = static_cast<std::uint64_t>(m);
        if (low < range) {
            const std::uint64_t threshold = (0 - range) % range;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<unsigned __int128>(x) * range;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return lo + static_cast<std::int64_t>(static_cast<std::uint64_t>(m >> 64));
    }

    bool bernoulli(double p) { return uniform_double() < p; }

    // Standard normal via Box-Muller. Two uniforms per call, no caching, so
    // the draw count per call is fixed.
    double normal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
    std::uint64_t seed_;
};

// Stable 64-bit seed derivation: FNV-1a over the little-endian bytes of
// `global_seed` followed by the label bytes, then a splitmix64 finalizer for
// avalanche. The exact recipe is part of the manifest contract (same inputs
// give the same seed on every platform).
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view label) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>((global_seed >> (8 * i)) & 0xFF));
    for (char c : label) mix(static_cast<unsigned char>(c));
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
    h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
    return h ^ (h >> 31);
}

}  // namespace nsn
