#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "planted/constraint_source.hpp"
#include "planted/csp.hpp"
#include "planted/oracle.hpp"

namespace planted {

struct RecoveryConfig {
    int r0 = 2;
    double epsilon = 0.1;
    double delta = 0.1;
    // Extra attempts per phase with fresh oracle batches after a FAIL.
    // 0 keeps the single-shot FAIL semantics.
    int max_phase_retries = 0;
    // recover_basic materializes all C(n, r0) constraints; refuse above this.
    std::size_t basic_n_cap = 40;

    void validate() const;
};

// Sample-size schedule for one round, all logs natural, all counts ceiled
// with a floor of 1.
struct RoundPlan {
    std::uint64_t total_verify_calls = 0;  // T = ceil(r0 * 2^(r0+1) * ln(2/eps))
    double eps_x = 0.0;                    // per-round target accuracy, clamped to <= 1
    std::uint64_t base_batch = 0;          // s = ceil(10 * (|Y| / (eps_x |X|)) * ln(10T/delta))
    std::uint64_t basic_batch = 0;         // A = ceil(2^r0 * ln(1/delta) * ln(1/eps) / eps^2)

    std::uint64_t ascend_batch(int i) const { return base_batch << i; }  // s_i = s * 2^i

    static RoundPlan make(const RecoveryConfig& cfg, std::size_t n_total,
                          std::size_t n_unassigned);
};

enum class FailKind {
    PhaseFail,          // verified batch intersected the working set too thinly
    SmallIntersection,  // ascend step: too few sampled variables were decided
    AscendFail,         // escalation reached arity r0 (possible only under breach)
    AscendOverflow,     // basic tier: escalation past arity r0-1
    NoOptimistic,       // no assignment cleared the sample fraction threshold
    EmptyConstraint,    // a queried tuple carried no constraint
    NoProgress          // degenerate working set; no phase could run
};

std::string to_string(FailKind k);

struct FailEvent {
    FailKind kind;
    int phase = 0;
    int level = 0;  // ascend arity where relevant, else 0
    std::string detail;
};

struct RecoveryOutcome {
    Assignment assignment;   // length n; unassigned coordinates filled with T
    BitVec assigned_mask;    // true where the algorithm committed a value
    std::uint64_t verified_used = 0;
    int phases = 0;
    // Every FAIL encountered, including ones a retry recovered from.
    std::vector<FailEvent> fail_events;
    // True when a FAIL ended the run early (unassigned variables were filled
    // arbitrarily rather than by a completed pass).
    bool aborted = false;

    // Diagnostics for the progress / escalation-depth properties.
    std::vector<std::size_t> phase_commits;
    int max_ascend_depth = 0;

    bool failed() const { return aborted; }
};

// The r0=2 tier: exact optimistic values over all pair constraints,
// pessimistic mass-commit checked against one verified batch per phase.
RecoveryOutcome recover_r2(ConstraintSource& source, VerifiedOracle& oracle,
                           const RecoveryConfig& cfg);

// Reference tier for any r0: full descend over every tuple of each arity
// (optimistic fractions computed exactly), ascend-and-verify escalation.
// Materializes all tuples of the working set; gated to small n.
RecoveryOutcome recover_basic(ConstraintSource& source, VerifiedOracle& oracle,
                              const RecoveryConfig& cfg);

// Linear-time tier: optimistic assignments estimated by sampling
// (find_optimistic), lazy arity-r0 queries only. seed drives the
// constraint-sampling streams; the oracle drives all verified randomness.
RecoveryOutcome recover_efficient(ConstraintSource& source, VerifiedOracle& oracle,
                                  const RecoveryConfig& cfg, std::uint64_t seed);

// Phase-scoped memo for derived constraints, shared across the recursion.
// Concurrent identical inserts are harmless: results are derived-seeded.
using OptimisticCache = std::unordered_map<VarTuple, ConstraintSet, VarTupleHash>;

// Derived constraint for a tuple of arity < r0: samples extension variables
// from pool minus t, recursively derives their constraints, picks the
// lexicographically first assignment deciding at least a 1/2^|t| fraction of
// the samples, and returns everything except that assignment. At arity r0,
// returns the source constraint unchanged. Consumes no verified samples.
// Throws EmptyConstraintError when the source has no constraint for a
// queried tuple, NoOptimisticFound when no assignment clears the threshold.
ConstraintSet find_optimistic(ConstraintSource& source, const VarTuple& t, double gamma, int r0,
                              std::span<const VarId> pool, std::uint64_t phase_seed,
                              OptimisticCache* cache = nullptr);

// Thrown by find_optimistic when no assignment reaches the sample-fraction
// threshold; unreachable unless the constraint data itself is broken.
struct NoOptimisticFound : Error {
    using Error::Error;
};

// One ascend step of the efficient tier, exposed for fixture tests. t has
// arity i with oracle-verified values a_t, established by the caller to lie
// outside the derived constraint C_t. Returns either the committed
// assignments for this phase or the FAIL that ended it.
struct AscendResult {
    std::vector<std::pair<VarId, bool>> commits;
    std::optional<FailEvent> fail;
    int depth = 1;  // deepest arity the escalation reached

    bool ok() const { return !fail.has_value(); }
};

AscendResult efficient_ascend(ConstraintSource& source, VerifiedOracle& oracle,
                              std::span<const VarId> pool, int i, const VarTuple& t,
                              const PartialAssignment& a_t, const RoundPlan& plan,
                              const RecoveryConfig& cfg, std::size_t n_total,
                              std::uint64_t phase_seed, OptimisticCache* cache);

}  // namespace planted
