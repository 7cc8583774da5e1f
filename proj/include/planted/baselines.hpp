#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "planted/constraint_source.hpp"
#include "planted/csp.hpp"
#include "planted/oracle.hpp"
#include "planted/sim.hpp"

namespace planted {

// Every assignment satisfying all provided constraints, deduplicated and in
// lexicographic order.
struct SolutionSet {
    std::vector<Assignment> assignments;

    bool contains(const Assignment& a) const;
    std::size_t size() const { return assignments.size(); }
    bool empty() const { return assignments.empty(); }
};

// Exhaustive satisfying-assignment enumeration for n <= 24 (DFS with
// constraint pruning). The independent ground-truth oracle behind the
// recovery tests.
SolutionSet enumerate_satisfying(std::span<const ConstraintSet> constraints, std::size_t n);

// All C(n, r0) tuple constraints from a source. Throws EmptyConstraintError
// if any tuple has none.
std::vector<ConstraintSet> materialize_constraints(ConstraintSource& source, std::size_t n,
                                                   int r0);

// Nearest-agreement recovery: draws k verified samples and returns the
// solution agreeing with the most of them, ties to the lexicographically
// smallest assignment.
Assignment vc_recover(const SolutionSet& solutions, VerifiedOracle& oracle, std::size_t k);

// Verified-sample bound k = ceil(multiplier * (1/eps) * (r ln(1/eps) +
// ln(1/delta))); the multiplier is this implementation's reported constant.
std::size_t vc_sample_bound(int r0, double epsilon, double delta, double multiplier = 4.0);

// Greedy cover count: centers picked in lexicographic order, absorbing all
// solutions within epsilon*n Hamming distance. An upper bound on the true
// cluster count, deterministic.
std::size_t cluster_count(const SolutionSet& solutions, double epsilon);

// Strawman: per-variable majority vote over one sampled review batch per
// variable (each variable is placed into one r0-tuple with seeded random
// partners, and every batch votes on all of its tuple's members). Ties to T.
Assignment majority_baseline(ConstraintProvider& provider, std::size_t n);

}  // namespace planted
