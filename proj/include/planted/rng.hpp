#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace planted {

// splitmix64 (Steele, Lea, Flood). Every random stream in the project is one
// of these, seeded through SeedChain, so runs are reproducible across
// platforms without relying on std:: distribution internals.
struct SplitMix64 {
    std::uint64_t state = 0;

    SplitMix64() = default;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 significant bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0,n). Fixed-point multiply; the O(n/2^64) bias is far below
    // anything the statistical tests can see.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    bool bernoulli(double p) { return next_unit() < p; }
};

// 64-bit FNV-1a, used to hash stream labels into seed material.
constexpr std::uint64_t label_hash(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (0x9E3779B97F4A7C15ULL + b + (a << 12) + (a >> 9)));
    g.next();
    return g.next();
}

// Derives substream seeds as a fold of mix64 over components. The scheme is
// the documented contract for reproducibility: identical chains give
// identical streams, any differing component decorrelates them.
struct SeedChain {
    std::uint64_t h;

    explicit SeedChain(std::uint64_t root) : h(root) {}
    SeedChain& with(std::uint64_t part) {
        h = mix64(h, part);
        return *this;
    }
    SeedChain& with(std::string_view label) { return with(label_hash(label)); }
    std::uint64_t value() const { return h; }
};

// Exact Binomial(n, p) draw: CDF inversion for small mean, Hormann's BTRS
// transformed rejection otherwise. Deterministic given the generator state.
std::uint64_t binomial_draw(SplitMix64& rng, std::uint64_t n, double p);

// Multinomial(m, probs) counts via the conditional-binomial chain.
// probs must sum to ~1; out.size() == probs.size().
void multinomial_counts(SplitMix64& rng, std::uint64_t m, std::span<const double> probs,
                        std::span<std::uint64_t> out);

}  // namespace planted
