#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "planted/constraint_source.hpp"
#include "planted/csp.hpp"

namespace planted {

enum class AdversaryKind { UniformCover, ConstantVector, AntiPlanted, RandomIndependent };

struct Adversary {
    AdversaryKind kind = AdversaryKind::RandomIndependent;
    // Only for ConstantVector; length must equal r0.
    PartialAssignment pattern;

    static Adversary uniform_cover() { return {AdversaryKind::UniformCover, {}}; }
    static Adversary constant_vector(PartialAssignment p) {
        return {AdversaryKind::ConstantVector, p};
    }
    static Adversary anti_planted() { return {AdversaryKind::AntiPlanted, {}}; }
    static Adversary random_independent() { return {AdversaryKind::RandomIndependent, {}}; }

    std::string to_string() const;
    static Adversary parse(const std::string& s, int r0);

    bool operator==(const Adversary&) const = default;
};

struct SimConfig {
    std::size_t n = 0;
    int r0 = 2;
    double alpha = 1.0;       // good-reviewer fraction, (0,1]
    double p = 0.0;           // good-reviewer per-item error probability, [0, 0.5)
    std::uint64_t m_per_tuple = 0;
    Adversary adversary;
    std::uint64_t seed = 0;

    // Throws ConfigError / AdversaryInfeasible on bad parameters.
    void validate() const;
};

// Documented default: ceil(50 * 2^r0 * ln n).
std::uint64_t default_m_per_tuple(int r0, std::size_t n);

// Reviews per tuple sufficient (by a Chernoff bound) for the planted
// restriction to clear the frequency threshold with probability 1 - 1/n^2
// per tuple. nullopt when alpha*(1-p)^r0 is at or below 1/2^r0, where no
// sample size helps.
std::optional<std::uint64_t> chernoff_sufficient_m(double alpha, double p, int r0, std::size_t n);

// Deterministic pseudorandom planted assignment; same (n, seed) gives the
// same vector.
Assignment gen_planted(std::size_t n, std::uint64_t seed);

// Per-tuple multiset of review vectors, counts indexed by
// PartialAssignment::mask(). Counts sum to m_per_tuple.
struct ReviewBatch {
    VarTuple tuple;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    std::uint64_t count_of(const PartialAssignment& a) const { return counts[a.mask()]; }
};

// Review vectors whose frequency strictly exceeds 1/2^arity become the
// allowed set. nullopt when nothing clears the threshold.
std::optional<ConstraintSet> build_constraint(const ReviewBatch& batch);

// Lazily simulated dataset: each tuple's reviews are generated on demand
// from a seed derived from (config seed, tuple), so any query order yields
// the same data and distinct tuples are independent.
class ConstraintProvider final : public ConstraintSource {
public:
    ConstraintProvider(SimConfig cfg, Assignment planted);

    const SimConfig& config() const { return cfg_; }
    std::size_t n() const { return cfg_.n; }

    // m_per_tuple i.i.d. reviewer draws for tuple t: good with probability
    // alpha (planted restriction with per-bit flips at rate p), adversarial
    // otherwise. Deterministic per (seed, t).
    ReviewBatch sample_reviews(const VarTuple& t) const;

    // Memoized build_constraint(sample_reviews(t)). Counts a soundness
    // breach when the planted restriction is missing from a nonempty result,
    // and an empty event when no vector clears the threshold.
    std::optional<ConstraintSet> query(const VarTuple& t) override;

    std::uint64_t breach_count() const { return breaches_.load(); }
    std::uint64_t empty_count() const { return empties_.load(); }
    std::size_t cached_tuples() const;

private:
    std::vector<double> mixture(const VarTuple& t, PartialAssignment& planted_restriction) const;

    SimConfig cfg_;
    Assignment planted_;

    mutable std::mutex mu_;
    std::unordered_map<VarTuple, std::optional<ConstraintSet>, VarTupleHash> cache_;
    std::atomic<std::uint64_t> breaches_{0};
    std::atomic<std::uint64_t> empties_{0};
};

}  // namespace planted
