#include "planted/rng.hpp"

#include <cassert>
#include <cmath>

namespace planted {

namespace {

// Inversion by walking the pmf recurrence; intended for n*p < ~30 where the
// walk is short. Truncation at k=n absorbs the ~1e-15 of mass the double
// accumulation can lose.
std::uint64_t binomial_inversion(SplitMix64& rng, std::uint64_t n, double p) {
    const double q = 1.0 - p;
    const double u = rng.next_unit();
    double pmf = std::exp(static_cast<double>(n) * std::log(q));  // P[X = 0]
    double cdf = pmf;
    std::uint64_t k = 0;
    while (u > cdf && k < n) {
        pmf *= (static_cast<double>(n - k) / static_cast<double>(k + 1)) * (p / q);
        cdf += pmf;
        ++k;
    }
    return k;
}

// BTRS transformed rejection (Hormann 1993), valid for n*p >= 10 and p <= 1/2.
std::uint64_t binomial_btrs(SplitMix64& rng, std::uint64_t n, double p) {
    const double nd = static_cast<double>(n);
    const double q = 1.0 - p;
    const double spq = std::sqrt(nd * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double v_r = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / q);
    const double m = std::floor((nd + 1.0) * p);
    const double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);

    for (;;) {
        const double u = rng.next_unit() - 0.5;
        const double v = rng.next_unit();
        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + c);
        if (kd < 0.0 || kd > nd) continue;
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kd);
        const double v2 = std::log(v * alpha / (a / (us * us) + b));
        const double accept =
            h - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + (kd - m) * lpq;
        if (v2 <= accept) return static_cast<std::uint64_t>(kd);
    }
}

}  // namespace

std::uint64_t binomial_draw(SplitMix64& rng, std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial_draw(rng, n, 1.0 - p);
    if (static_cast<double>(n) * p < 30.0) return binomial_inversion(rng, n, p);
    return binomial_btrs(rng, n, p);
}

void multinomial_counts(SplitMix64& rng, std::uint64_t m, std::span<const double> probs,
                        std::span<std::uint64_t> out) {
    assert(probs.size() == out.size());
    std::uint64_t left = m;
    double mass = 1.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (i + 1 == probs.size() || left == 0) {
            out[i] = left;
            left = 0;
            // remaining cells, if any, get zero
            for (std::size_t j = i + 1; j < probs.size(); ++j) out[j] = 0;
            return;
        }
        double cond = mass > 0.0 ? probs[i] / mass : 1.0;
        if (cond < 0.0) cond = 0.0;
        if (cond > 1.0) cond = 1.0;
        const std::uint64_t c = binomial_draw(rng, left, cond);
        out[i] = c;
        left -= c;
        mass -= probs[i];
    }
}

}  // namespace planted
