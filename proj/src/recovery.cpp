#include "planted/recovery.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <variant>

namespace planted {

namespace {

std::uint64_t ceil_at_least_one(double x) {
    const double c = std::ceil(x);
    if (!(c >= 1.0)) return 1;
    return static_cast<std::uint64_t>(c);
}

ConstraintSet query_required(ConstraintSource& src, const VarTuple& t) {
    auto c = src.query(t);
    if (!c) throw EmptyConstraintError("no constraint for tuple " + t.to_string());
    return std::move(*c);
}

bool contains_sorted(std::span<const VarId> pool, VarId v) {
    return std::binary_search(pool.begin(), pool.end(), v);
}

// Shared bookkeeping for one recovery run.
struct RunState {
    explicit RunState(std::size_t n) : n_total(n), values(n), assigned(n) {}

    std::size_t n_total;
    Assignment values;
    BitVec assigned;
    std::vector<VarId> pool;  // unassigned, ascending
    RecoveryOutcome out;

    void rebuild_pool() {
        pool.clear();
        for (std::size_t i = 0; i < n_total; ++i)
            if (!assigned.test(i)) pool.push_back(static_cast<VarId>(i));
    }

    void apply(const std::vector<std::pair<VarId, bool>>& commits) {
        std::size_t fresh = 0;
        for (auto [v, val] : commits) {
            if (!assigned.test(v)) ++fresh;
            assigned.set(v);
            values.set(v, val);
        }
        out.phase_commits.push_back(fresh);
    }

    RecoveryOutcome finish(VerifiedOracle& oracle) {
        // Unassigned coordinates get the constant arbitrary fill, T.
        for (std::size_t i = 0; i < n_total; ++i)
            if (!assigned.test(i)) values.set(i, true);
        out.assignment = values;
        out.assigned_mask = assigned;
        out.verified_used = oracle.used();
        return std::move(out);
    }
};

using PhaseResult = std::variant<std::vector<std::pair<VarId, bool>>, FailEvent>;

// Runs one phase attempt with retry/abort bookkeeping. attempt() must draw
// fresh oracle batches on each call.
template <typename Attempt>
bool run_phase_with_retries(RunState& st, const RecoveryConfig& cfg, int phase, Attempt&& attempt) {
    for (int tries = 0;; ++tries) {
        PhaseResult res = attempt();
        if (auto* commits = std::get_if<std::vector<std::pair<VarId, bool>>>(&res)) {
            st.apply(*commits);
            return true;
        }
        FailEvent ev = std::get<FailEvent>(res);
        ev.phase = phase;
        if (tries < cfg.max_phase_retries) {
            ev.detail += " (retried)";
            st.out.fail_events.push_back(std::move(ev));
            continue;
        }
        st.out.fail_events.push_back(std::move(ev));
        st.out.aborted = true;
        return false;
    }
}

}  // namespace

void RecoveryConfig::validate() const {
    if (r0 < 2) throw ConfigError("recovery.r0 must be >= 2");
    if (r0 > VarTuple::kMaxArity) throw ConfigError("recovery.r0 exceeds arity cap");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("recovery.epsilon must be in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("recovery.delta must be in (0,1)");
    if (max_phase_retries < 0) throw ConfigError("recovery.max_phase_retries must be >= 0");
}

RoundPlan RoundPlan::make(const RecoveryConfig& cfg, std::size_t n_total,
                          std::size_t n_unassigned) {
    assert(n_unassigned >= 1 && n_unassigned <= n_total);
    RoundPlan plan;
    const double ln_2e = std::log(2.0 / cfg.epsilon);
    plan.total_verify_calls = ceil_at_least_one(cfg.r0 * std::ldexp(1.0, cfg.r0 + 1) * ln_2e);
    const double ratio = static_cast<double>(n_total) / static_cast<double>(n_unassigned);
    plan.eps_x = std::min(1.0, cfg.epsilon / (2.0 * ln_2e) * ratio);
    plan.base_batch = ceil_at_least_one(
        10.0 * (ratio / plan.eps_x) *
        std::log(10.0 * static_cast<double>(plan.total_verify_calls) / cfg.delta));
    plan.basic_batch = ceil_at_least_one(std::ldexp(1.0, cfg.r0) * std::log(1.0 / cfg.delta) *
                                         std::log(1.0 / cfg.epsilon) /
                                         (cfg.epsilon * cfg.epsilon));
    return plan;
}

std::string to_string(FailKind k) {
    switch (k) {
        case FailKind::PhaseFail: return "phase_fail";
        case FailKind::SmallIntersection: return "small_intersection";
        case FailKind::AscendFail: return "ascend_fail";
        case FailKind::AscendOverflow: return "ascend_overflow";
        case FailKind::NoOptimistic: return "no_optimistic";
        case FailKind::EmptyConstraint: return "empty_constraint";
        case FailKind::NoProgress: return "no_progress";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// find_optimistic

ConstraintSet find_optimistic(ConstraintSource& source, const VarTuple& t, double gamma, int r0,
                              std::span<const VarId> pool, std::uint64_t phase_seed,
                              OptimisticCache* cache) {
    if (t.arity() == r0) return query_required(source, t);
    if (t.arity() < 1 || t.arity() > r0)
        throw ArityMismatch("find_optimistic: tuple arity must be in [1, r0]");
    if (cache) {
        auto it = cache->find(t);
        if (it != cache->end()) return it->second;
    }

    const int r = t.arity();
    const std::uint64_t s =
        ceil_at_least_one(3.0 * std::ldexp(1.0, r) * std::log(1.0 / gamma));

    SeedChain chain(phase_seed);
    chain.with("find_optimistic");
    for (VarId v : t.vars()) chain.with(std::uint64_t{v} + 1);
    SplitMix64 rng(chain.value());

    // Sample extension variables from pool \ t, with replacement; rejection
    // first, a filtered copy once a tiny pool makes rejection spin.
    std::size_t in_t = 0;
    for (VarId v : t.vars())
        if (contains_sorted(pool, v)) ++in_t;
    if (pool.size() <= in_t)
        throw NoOptimisticFound("find_optimistic: no extension variables available for " +
                                t.to_string());
    std::vector<VarId> filtered;
    auto draw_extension = [&]() -> VarId {
        for (int tries = 0; tries < 128; ++tries) {
            const VarId v = pool[rng.below(pool.size())];
            if (!t.contains(v)) return v;
        }
        if (filtered.empty()) {
            for (VarId v : pool)
                if (!t.contains(v)) filtered.push_back(v);
        }
        return filtered[rng.below(filtered.size())];
    };

    std::vector<VarId> samples(s);
    for (auto& v : samples) v = draw_extension();

    const double child_gamma = gamma / (2.0 * static_cast<double>(s));
    std::unordered_map<VarId, ConstraintSet> child;
    child.reserve(samples.size());
    for (VarId x : samples) {
        if (child.find(x) != child.end()) continue;
        child.emplace(x,
                      find_optimistic(source, t.with(x), child_gamma, r0, pool, phase_seed, cache));
    }

    // Count, per candidate assignment to t, how many sampled variables it
    // decides (multiplicity preserved; Forced and Contradiction both count).
    const std::uint32_t cells = 1U << r;
    std::vector<std::uint64_t> decided(cells, 0);
    for (VarId x : samples) {
        const ConstraintSet& cx = child.at(x);
        for (std::uint32_t m = 0; m < cells; ++m)
            if (implied_value(cx, PartialAssignment(m, r), x).decides()) ++decided[m];
    }

    for (std::uint32_t rank = 0; rank < cells; ++rank) {
        const auto sigma = PartialAssignment::from_lex_rank(rank, r);
        if ((decided[sigma.mask()] << r) >= s) {
            ConstraintSet result = ConstraintSet::all_except(t, sigma);
            if (cache) cache->emplace(t, result);
            return result;
        }
    }
    throw NoOptimisticFound("find_optimistic: no assignment cleared the 1/2^" +
                            std::to_string(r) + " sample fraction for " + t.to_string());
}

// ---------------------------------------------------------------------------
// recover_r2

RecoveryOutcome recover_r2(ConstraintSource& source, VerifiedOracle& oracle,
                           const RecoveryConfig& cfg) {
    cfg.validate();
    if (cfg.r0 != 2) throw ConfigError("recover_r2 requires r0 == 2");

    const std::size_t n = oracle.universe_size();
    RunState st(n);
    st.rebuild_pool();

    const double stop_below = cfg.epsilon * static_cast<double>(n) / 2.0;
    const std::uint64_t batch_size =
        ceil_at_least_one(10.0 * std::log(1.0 / cfg.delta) / (cfg.epsilon * cfg.epsilon));
    const double min_hits = std::log(1.0 / cfg.delta) / cfg.epsilon;

    int phase = 0;
    while (!st.pool.empty() && static_cast<double>(st.pool.size()) >= stop_below) {
        if (st.pool.size() < 2) {
            st.out.fail_events.push_back({FailKind::NoProgress, phase, 0, "fewer than 2 unassigned"});
            st.out.aborted = true;
            break;
        }
        ++phase;
        st.out.phases = phase;

        auto attempt = [&]() -> PhaseResult {
            try {
                const auto& pool = st.pool;
                // Exact optimistic value per remaining variable: the value
                // deciding the most other remaining variables, ties to F.
                std::vector<bool> pessimistic(pool.size());
                for (std::size_t i = 0; i < pool.size(); ++i) {
                    const VarId x = pool[i];
                    std::uint64_t decided_f = 0, decided_t = 0;
                    for (const VarId y : pool) {
                        if (y == x) continue;
                        const ConstraintSet c = query_required(source, VarTuple{x, y});
                        if (implied_value(c, PartialAssignment(0, 1), y).decides()) ++decided_f;
                        if (implied_value(c, PartialAssignment(1, 1), y).decides()) ++decided_t;
                    }
                    const bool optimistic = decided_t > decided_f;  // tie -> F
                    pessimistic[i] = !optimistic;
                }

                std::vector<std::int64_t> pool_index(n, -1);
                for (std::size_t i = 0; i < pool.size(); ++i)
                    pool_index[pool[i]] = static_cast<std::int64_t>(i);

                const auto batch = oracle.sample_batch(batch_size);
                std::vector<std::pair<VarId, bool>> hits;
                for (auto [v, val] : batch)
                    if (pool_index[v] >= 0) hits.emplace_back(v, val);
                if (static_cast<double>(hits.size()) < min_hits)
                    return FailEvent{FailKind::PhaseFail, 0, 0,
                                     std::to_string(hits.size()) + " of " +
                                         std::to_string(batch_size) + " samples in working set"};

                const std::pair<VarId, bool>* mismatch = nullptr;
                for (const auto& h : hits) {
                    if (pessimistic[static_cast<std::size_t>(pool_index[h.first])] != h.second) {
                        mismatch = &h;
                        break;
                    }
                }

                std::vector<std::pair<VarId, bool>> commits;
                if (!mismatch) {
                    commits.reserve(pool.size());
                    for (std::size_t i = 0; i < pool.size(); ++i)
                        commits.emplace_back(pool[i], pessimistic[i]);
                } else {
                    const auto [v, a_v] = *mismatch;
                    commits.emplace_back(v, a_v);
                    const PartialAssignment sub(a_v ? 1U : 0U, 1);
                    for (const VarId y : pool) {
                        if (y == v) continue;
                        const ConstraintSet c = query_required(source, VarTuple{v, y});
                        const Implication impl = implied_value(c, sub, y);
                        if (impl.is_forced()) commits.emplace_back(y, impl.forced_value());
                        // Contradiction against a verified value marks broken
                        // data for this pair; nothing to commit.
                    }
                }
                return commits;
            } catch (const EmptyConstraintError& e) {
                return FailEvent{FailKind::EmptyConstraint, 0, 0, e.what()};
            }
        };

        if (!run_phase_with_retries(st, cfg, phase, attempt)) break;
        st.rebuild_pool();
    }

    return st.finish(oracle);
}

// ---------------------------------------------------------------------------
// recover_basic

namespace {

// Visits every arity-k subset of pool in lexicographic order.
template <typename Fn>
void for_each_subset(std::span<const VarId> pool, int k, Fn&& fn) {
    const int n = static_cast<int>(pool.size());
    if (k > n) return;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::vector<VarId> vars(static_cast<std::size_t>(k));
    for (;;) {
        for (int i = 0; i < k; ++i) vars[static_cast<std::size_t>(i)] = pool[idx[i]];
        fn(VarTuple(vars));
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

struct BasicPhase {
    ConstraintSource& source;
    VerifiedOracle& oracle;
    const RecoveryConfig& cfg;
    std::span<const VarId> pool;
    double min_hits;
    int* max_depth;

    // derived[a] holds the descended arity-a constraints for this phase
    std::vector<OptimisticCache> derived;

    ConstraintSet constraint_at(const VarTuple& t) {
        if (t.arity() == cfg.r0) return query_required(source, t);
        return derived[static_cast<std::size_t>(t.arity())].at(t);
    }

    // Builds the descended constraint maps for arities r0-1 down to 1 by
    // stripping each tuple's optimistic assignment, with decided fractions
    // computed exactly over every extension in the pool.
    void descend() {
        derived.assign(static_cast<std::size_t>(cfg.r0), OptimisticCache{});
        for (int a = cfg.r0 - 1; a >= 1; --a) {
            for_each_subset(pool, a, [&](const VarTuple& t) {
                const std::uint32_t cells = 1U << a;
                std::vector<std::uint64_t> decided(cells, 0);
                std::uint64_t extensions = 0;
                for (const VarId x : pool) {
                    if (t.contains(x)) continue;
                    ++extensions;
                    const ConstraintSet up = constraint_at(t.with(x));
                    for (std::uint32_t m = 0; m < cells; ++m)
                        if (implied_value(up, PartialAssignment(m, a), x).decides()) ++decided[m];
                }
                for (std::uint32_t rank = 0; rank < cells; ++rank) {
                    const auto sigma = PartialAssignment::from_lex_rank(rank, a);
                    if (decided[sigma.mask()] << (a + 1) >= extensions) {
                        derived[static_cast<std::size_t>(a)].emplace(
                            t, ConstraintSet::all_except(t, sigma));
                        return;
                    }
                }
                throw NoOptimisticFound("descend: no optimistic assignment for " + t.to_string());
            });
        }
    }

    // Verifies proposals against a fresh batch; commits on agreement, climbs
    // one arity on a contradiction. level = arity of the constraints the
    // proposals came from; u carries the verified assignment rho.
    PhaseResult ascend_verify(int level, const VarTuple& u, const PartialAssignment& rho,
                              const std::vector<std::pair<VarId, bool>>& proposals) {
        *max_depth = std::max(*max_depth, level);
        const std::uint64_t a_batch =
            RoundPlan::make(cfg, oracle.universe_size(), pool.size()).basic_batch;
        std::vector<std::int8_t> proposed(oracle.universe_size(), -1);
        for (auto [v, val] : proposals) proposed[v] = val ? 1 : 0;

        const auto batch = oracle.sample_batch(a_batch);
        std::vector<std::pair<VarId, bool>> hits;
        for (auto [v, val] : batch)
            if (proposed[v] >= 0) hits.emplace_back(v, val);
        if (static_cast<double>(hits.size()) < min_hits)
            return FailEvent{FailKind::PhaseFail, 0, level,
                             std::to_string(hits.size()) + " verified hits on proposals"};

        const std::pair<VarId, bool>* mismatch = nullptr;
        for (const auto& h : hits) {
            if ((proposed[h.first] == 1) != h.second) {
                mismatch = &h;
                break;
            }
        }
        if (!mismatch) {
            std::vector<std::pair<VarId, bool>> commits = proposals;
            for (int j = 0; j < u.arity(); ++j) commits.emplace_back(u[j], rho.bit(j));
            return commits;
        }

        const auto [v, a_v] = *mismatch;
        if (level + 1 > cfg.r0)
            return FailEvent{FailKind::AscendOverflow, 0, level,
                             "verified contradiction against arity-" + std::to_string(cfg.r0) +
                                 " constraints at variable " + std::to_string(v)};

        const VarTuple u_next = u.with(v);
        const PartialAssignment rho_next = rho.with_inserted(u_next.position_of(v), a_v);
        std::vector<std::pair<VarId, bool>> next;
        for (const VarId x : pool) {
            if (u_next.contains(x)) continue;
            const ConstraintSet up = constraint_at(u_next.with(x));
            const Implication impl = implied_value(up, rho_next, x);
            if (impl.is_forced()) next.emplace_back(x, impl.forced_value());
        }
        return ascend_verify(level + 1, u_next, rho_next, next);
    }

    PhaseResult run() {
        try {
            descend();
            std::vector<std::pair<VarId, bool>> proposals;
            proposals.reserve(pool.size());
            for (const VarId x : pool) {
                const ConstraintSet& cx = derived[1].at(VarTuple{x});
                proposals.emplace_back(x, cx.allowed_list().front().bit(0));
            }
            return ascend_verify(1, VarTuple{}, PartialAssignment(0, 0), proposals);
        } catch (const EmptyConstraintError& e) {
            return FailEvent{FailKind::EmptyConstraint, 0, 0, e.what()};
        } catch (const NoOptimisticFound& e) {
            return FailEvent{FailKind::NoOptimistic, 0, 0, e.what()};
        }
    }
};

}  // namespace

RecoveryOutcome recover_basic(ConstraintSource& source, VerifiedOracle& oracle,
                              const RecoveryConfig& cfg) {
    cfg.validate();
    const std::size_t n = oracle.universe_size();
    if (n > cfg.basic_n_cap)
        throw TooLarge("recover_basic materializes all C(n,r0) constraints; n = " +
                       std::to_string(n) + " exceeds cap " + std::to_string(cfg.basic_n_cap));

    RunState st(n);
    st.rebuild_pool();
    const double stop_below = cfg.epsilon * static_cast<double>(n) / 2.0;
    const double min_hits = std::log(1.0 / cfg.delta) / cfg.epsilon;

    int phase = 0;
    while (!st.pool.empty() && static_cast<double>(st.pool.size()) >= stop_below) {
        if (st.pool.size() <= static_cast<std::size_t>(cfg.r0)) {
            st.out.fail_events.push_back(
                {FailKind::NoProgress, phase, 0, "working set not larger than r0"});
            st.out.aborted = true;
            break;
        }
        ++phase;
        st.out.phases = phase;

        auto attempt = [&]() -> PhaseResult {
            BasicPhase ph{source, oracle, cfg, st.pool, min_hits, &st.out.max_ascend_depth, {}};
            return ph.run();
        };
        if (!run_phase_with_retries(st, cfg, phase, attempt)) break;
        st.rebuild_pool();

        if (!st.out.phase_commits.empty() && st.out.phase_commits.back() == 0) {
            st.out.fail_events.push_back({FailKind::NoProgress, phase, 0, "phase committed nothing"});
            st.out.aborted = true;
            break;
        }
    }

    return st.finish(oracle);
}

// ---------------------------------------------------------------------------
// recover_efficient

AscendResult efficient_ascend(ConstraintSource& source, VerifiedOracle& oracle,
                              std::span<const VarId> pool, int i, const VarTuple& t,
                              const PartialAssignment& a_t, const RoundPlan& plan,
                              const RecoveryConfig& cfg, std::size_t n_total,
                              std::uint64_t phase_seed, OptimisticCache* cache) {
    AscendResult result;
    result.depth = i;
    if (i >= cfg.r0) {
        result.fail = FailEvent{FailKind::AscendFail, 0, i,
                                "escalation reached arity r0 with tuple " + t.to_string()};
        return result;
    }

    const std::uint64_t s_i = plan.ascend_batch(i);
    const double gamma =
        cfg.delta / (10.0 * static_cast<double>(plan.total_verify_calls) *
                     static_cast<double>(s_i));

    const auto batch = oracle.sample_batch(s_i);

    struct Hit {
        VarId v;
        bool verified;
        Implication impl;
    };
    std::vector<Hit> decided_hits;
    for (auto [v, val] : batch) {
        if (!contains_sorted(pool, v) || t.contains(v)) continue;
        const ConstraintSet c =
            find_optimistic(source, t.with(v), gamma, cfg.r0, pool, phase_seed, cache);
        const Implication impl = implied_value(c, a_t, v);
        if (impl.decides()) decided_hits.push_back({v, val, impl});
    }

    const double floor = static_cast<double>(s_i) * static_cast<double>(pool.size()) /
                         (4.0 * std::ldexp(1.0, i) * static_cast<double>(n_total));
    if (static_cast<double>(decided_hits.size()) <= floor) {
        result.fail = FailEvent{FailKind::SmallIntersection, 0, i,
                                std::to_string(decided_hits.size()) + " decided samples, floor " +
                                    std::to_string(floor)};
        return result;
    }

    const Hit* mismatch = nullptr;
    for (const auto& h : decided_hits) {
        // A contradiction against verified values means a higher-level
        // optimistic assignment was stripped wrongly; escalate just like a
        // wrong forced value.
        if (h.impl.is_contradiction() || h.impl.forced_value() != h.verified) {
            mismatch = &h;
            break;
        }
    }

    if (!mismatch) {
        result.commits.reserve(pool.size());
        for (int j = 0; j < t.arity(); ++j) result.commits.emplace_back(t[j], a_t.bit(j));
        for (const VarId x : pool) {
            if (t.contains(x)) continue;
            const ConstraintSet c =
                find_optimistic(source, t.with(x), gamma, cfg.r0, pool, phase_seed, cache);
            const Implication impl = implied_value(c, a_t, x);
            if (impl.is_forced()) result.commits.emplace_back(x, impl.forced_value());
        }
        return result;
    }

    const VarTuple t_next = t.with(mismatch->v);
    const PartialAssignment a_next =
        a_t.with_inserted(t_next.position_of(mismatch->v), mismatch->verified);
    return efficient_ascend(source, oracle, pool, i + 1, t_next, a_next, plan, cfg, n_total,
                            phase_seed, cache);
}

RecoveryOutcome recover_efficient(ConstraintSource& source, VerifiedOracle& oracle,
                                  const RecoveryConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const std::size_t n = oracle.universe_size();
    RunState st(n);
    st.rebuild_pool();
    const double stop_below = cfg.epsilon * static_cast<double>(n) / 2.0;

    int phase = 0;
    while (!st.pool.empty() && static_cast<double>(st.pool.size()) >= stop_below) {
        if (st.pool.size() <= static_cast<std::size_t>(cfg.r0)) {
            st.out.fail_events.push_back(
                {FailKind::NoProgress, phase, 0, "working set not larger than r0"});
            st.out.aborted = true;
            break;
        }
        ++phase;
        st.out.phases = phase;

        const RoundPlan plan = RoundPlan::make(cfg, n, st.pool.size());
        const std::uint64_t phase_seed =
            SeedChain(seed).with("phase").with(static_cast<std::uint64_t>(phase)).value();
        OptimisticCache cache;
        const double check_gamma = cfg.delta / static_cast<double>(plan.total_verify_calls);

        auto attempt = [&]() -> PhaseResult {
            try {
                const auto& pool = st.pool;
                const auto batch = oracle.sample_batch(plan.base_batch);
                std::vector<std::pair<VarId, bool>> in_pool;
                for (auto [v, val] : batch)
                    if (!st.assigned.test(v)) in_pool.emplace_back(v, val);
                if (static_cast<double>(in_pool.size()) <
                    static_cast<double>(plan.base_batch) * static_cast<double>(pool.size()) /
                        (2.0 * static_cast<double>(n)))
                    return FailEvent{FailKind::PhaseFail, 0, 0,
                                     std::to_string(in_pool.size()) + " of " +
                                         std::to_string(plan.base_batch) +
                                         " samples in working set"};

                const std::pair<VarId, bool>* mismatch = nullptr;
                for (const auto& h : in_pool) {
                    const ConstraintSet c = find_optimistic(source, VarTuple{h.first}, check_gamma,
                                                            cfg.r0, pool, phase_seed, &cache);
                    const bool pessimistic = c.allowed_list().front().bit(0);
                    if (pessimistic != h.second) {
                        mismatch = &h;
                        break;
                    }
                }

                if (!mismatch) {
                    std::vector<std::pair<VarId, bool>> commits;
                    commits.reserve(pool.size());
                    for (const VarId x : pool) {
                        const ConstraintSet c = find_optimistic(source, VarTuple{x}, check_gamma,
                                                                cfg.r0, pool, phase_seed, &cache);
                        commits.emplace_back(x, c.allowed_list().front().bit(0));
                    }
                    return commits;
                }

                AscendResult ar = efficient_ascend(source, oracle, pool, 1,
                                                   VarTuple{mismatch->first},
                                                   PartialAssignment(mismatch->second ? 1U : 0U, 1),
                                                   plan, cfg, n, phase_seed, &cache);
                st.out.max_ascend_depth = std::max(st.out.max_ascend_depth, ar.depth);
                if (!ar.ok()) return *ar.fail;
                return std::move(ar.commits);
            } catch (const EmptyConstraintError& e) {
                return FailEvent{FailKind::EmptyConstraint, 0, 0, e.what()};
            } catch (const NoOptimisticFound& e) {
                return FailEvent{FailKind::NoOptimistic, 0, 0, e.what()};
            }
        };

        if (!run_phase_with_retries(st, cfg, phase, attempt)) break;
        st.rebuild_pool();

        if (!st.out.phase_commits.empty() && st.out.phase_commits.back() == 0) {
            st.out.fail_events.push_back({FailKind::NoProgress, phase, 0, "phase committed nothing"});
            st.out.aborted = true;
            break;
        }
    }

    return st.finish(oracle);
}

}  // namespace planted
