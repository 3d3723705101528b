#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>

namespace conformal {

// splitmix64: portable, seedable generator with cheap stream derivation.
// Every randomised operation takes an explicit seed; substreams are derived
// by mixing the seed with a stream key, so results do not depend on the
// order in which streams are consumed.
struct Rng {
    std::uint64_t state = 0x9e3779b97f4a7c15ull;

    explicit Rng(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform on [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling keeps the draw unbiased
        const std::uint64_t limit = ~std::uint64_t(0) - ~std::uint64_t(0) % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Marsaglia polar method; implemented here so streams are identical
    // across platforms (std::normal_distribution is not pinned down).
    double normal() {
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
};

inline std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stream derived from (seed, key): independent of evaluation order.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t key) {
    return Rng(mix_u64(seed, key));
}

// Content hash of an example (features + label). Used to derive
// tie-breaking streams that are invariant under permutation of the bag.
inline std::uint64_t hash_features(std::span<const double> values, int label) {
    std::uint64_t h = 0x51b9ef5f2f3c4a1bull;
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        h = mix_u64(h, bits);
    }
    return mix_u64(h, static_cast<std::uint64_t>(label) + 0x7f4a7c15ull);
}

} // namespace conformal
