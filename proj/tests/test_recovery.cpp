#include "doctest.h"

#include <cmath>

#include "planted/baselines.hpp"
#include "planted/recovery.hpp"
#include "planted/sim.hpp"
#include "test_support.hpp"

using namespace planted;
using planted::testing::FixedSource;

namespace {

PartialAssignment pa(const char* tf) { return PartialAssignment::from_tf(tf); }

RecoveryConfig rc(int r0, double eps, double delta) {
    RecoveryConfig cfg;
    cfg.r0 = r0;
    cfg.epsilon = eps;
    cfg.delta = delta;
    return cfg;
}

SimConfig sc(std::size_t n, int r0, double alpha, double p, std::uint64_t m, Adversary adv,
             std::uint64_t seed) {
    SimConfig cfg;
    cfg.n = n;
    cfg.r0 = r0;
    cfg.alpha = alpha;
    cfg.p = p;
    cfg.m_per_tuple = m;
    cfg.adversary = adv;
    cfg.seed = seed;
    return cfg;
}

std::vector<VarId> full_pool(std::size_t n) {
    std::vector<VarId> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<VarId>(i);
    return pool;
}

// Committed counts must cover at least a 1/2^(r0+1) fraction of the working
// set entering each phase.
void check_progress(const RecoveryOutcome& out, std::size_t n, int r0) {
    std::size_t remaining = n;
    for (const std::size_t commits : out.phase_commits) {
        CHECK(commits * (std::size_t{1} << (r0 + 1)) >= remaining);
        remaining -= commits;
    }
}

}  // namespace

TEST_CASE("RoundPlan pins the sample-size formulas") {
    const auto plan = RoundPlan::make(rc(2, 0.1, 0.1), 300, 300);
    CHECK(plan.total_verify_calls == 48);  // ceil(2 * 8 * ln 20)
    CHECK(plan.eps_x == doctest::Approx(0.1 / (2.0 * std::log(20.0))));
    // s = ceil(10 * (1/eps_x) * ln(10 * 48 / 0.1)) = ceil(10 * 59.915 * 8.476)
    CHECK(plan.base_batch == 5079);
    CHECK(plan.ascend_batch(1) == 2 * plan.base_batch);
    CHECK(plan.ascend_batch(2) == 4 * plan.base_batch);
    // A = ceil(4 * ln 10 * ln 10 / 0.01)
    CHECK(plan.basic_batch == 2121);

    // halfway through, the per-round accuracy target doubles and the batch
    // size stays flat: the |Y|/|X| factors cancel inside s
    const auto later = RoundPlan::make(rc(2, 0.1, 0.1), 300, 150);
    CHECK(later.eps_x == doctest::Approx(2.0 * plan.eps_x));
    CHECK(later.base_batch == plan.base_batch);
}

TEST_CASE("recover_r2: two-cluster pairs resolve to the planted cluster") {
    auto src = planted::testing::example1_source();
    Assignment planted(10);
    planted.set_all(true);
    VerifiedOracle oracle(planted, 404);
    const auto out = recover_r2(src, oracle, rc(2, 0.2, 0.1));
    CHECK_FALSE(out.failed());
    CHECK(hamming_error(out.assignment, planted) == 0.0);
    CHECK(out.verified_used == oracle.used());
    CHECK(out.assigned_mask.count() == 10);
}

TEST_CASE("recover_r2: noiseless provider recovers exactly") {
    SimConfig cfg = sc(100, 2, 1.0, 0.0, 200, Adversary::random_independent(), 55);
    const Assignment planted = gen_planted(100, 55);
    ConstraintProvider provider(cfg, planted);
    VerifiedOracle oracle(planted, 55);
    const auto out = recover_r2(provider, oracle, rc(2, 0.1, 0.1));
    CHECK_FALSE(out.failed());
    CHECK(hamming_error(out.assignment, planted) == 0.0);
}

TEST_CASE("recover_r2: adversarial instance cross-checked against enumeration") {
    for (const std::uint64_t seed : {301ULL, 302ULL, 303ULL, 304ULL}) {
        SimConfig cfg = sc(12, 2, 0.3, 0.0, 2000, Adversary::anti_planted(), seed);
        const Assignment planted = gen_planted(12, seed);
        ConstraintProvider provider(cfg, planted);
        VerifiedOracle oracle(planted, seed);
        const RecoveryConfig cfg_r = rc(2, 0.25, 0.1);
        const auto out = recover_r2(provider, oracle, cfg_r);
        CHECK_FALSE(out.failed());
        CHECK(hamming_error(out.assignment, planted) <= cfg_r.epsilon);

        // brute-force oracle: output satisfies what the data pinned down
        if (provider.breach_count() == 0 && provider.empty_count() == 0) {
            const auto constraints = materialize_constraints(provider, 12, 2);
            const SolutionSet sols = enumerate_satisfying(constraints, 12);
            CHECK(sols.contains(planted));
            bool near_some = false;
            for (const auto& s : sols.assignments)
                if (hamming_error(out.assignment, s) <= cfg_r.epsilon) near_some = true;
            CHECK(near_some);
        }
    }
}

TEST_CASE("recover_r2: empty constraints abort with a structured failure") {
    FixedSource empty([](const VarTuple&) { return std::nullopt; });
    VerifiedOracle oracle(gen_planted(20, 1), 1);
    const auto out = recover_r2(empty, oracle, rc(2, 0.2, 0.1));
    CHECK(out.failed());
    REQUIRE_FALSE(out.fail_events.empty());
    CHECK(out.fail_events.front().kind == FailKind::EmptyConstraint);
}

TEST_CASE("recover_basic: noiseless r0=3 instance recovers exactly") {
    SimConfig cfg = sc(30, 3, 1.0, 0.0, 100, Adversary::random_independent(), 66);
    const Assignment planted = gen_planted(30, 66);
    ConstraintProvider provider(cfg, planted);
    VerifiedOracle oracle(planted, 66);
    const auto out = recover_basic(provider, oracle, rc(3, 0.2, 0.1));
    CHECK_FALSE(out.failed());
    CHECK(hamming_error(out.assignment, planted) == 0.0);
    CHECK(out.verified_used == oracle.used());
}

TEST_CASE("recover_basic: forbid-all-F instance tolerates the indistinguishable flip") {
    // planted = all-T except one F; any assignment with few F's satisfies
    // every constraint, so recovery is only promised up to eps
    auto src = planted::testing::example2_source(3);
    Assignment planted(12);
    planted.set_all(true);
    planted.set(4, false);
    const double eps = 0.6;  // >= 2 r0 / n
    VerifiedOracle oracle(planted, 12);
    const auto out = recover_basic(src, oracle, rc(3, eps, 0.1));
    CHECK_FALSE(out.failed());
    CHECK(hamming_error(out.assignment, planted) <= eps);
}

TEST_CASE("recover_basic: size cap") {
    SimConfig cfg = sc(50, 3, 1.0, 0.0, 100, Adversary::random_independent(), 3);
    const Assignment planted = gen_planted(50, 3);
    ConstraintProvider provider(cfg, planted);
    VerifiedOracle oracle(planted, 3);
    CHECK_THROWS_AS(recover_basic(provider, oracle, rc(3, 0.2, 0.1)), TooLarge);
}

TEST_CASE("recover_basic: statistical run against the strongest feasible adversary") {
    // r0=3, alpha=0.2 > 1/8: an anti-planted adversary leaves a two-cluster
    // dataset; recovery must pick the right cluster from verified samples
    int ok = 0;
    const int trials = 50;
    const RecoveryConfig cfg_r = rc(3, 0.25, 0.1);
    for (int trial = 0; trial < trials; ++trial) {
        const auto seed = static_cast<std::uint64_t>(9000 + trial);
        SimConfig cfg = sc(10, 3, 0.2, 0.0, 5000, Adversary::anti_planted(), seed);
        const Assignment planted = gen_planted(10, seed);
        ConstraintProvider provider(cfg, planted);
        VerifiedOracle oracle(planted, seed);
        const auto out = recover_basic(provider, oracle, cfg_r);
        if (!out.failed() && hamming_error(out.assignment, planted) <= cfg_r.epsilon) {
            // oracle cross-check on the same instance
            const SolutionSet sols =
                enumerate_satisfying(materialize_constraints(provider, 10, 3), 10);
            REQUIRE(sols.contains(planted));
            ++ok;
        }
    }
    CHECK(ok >= 45);  // >= 90%
}

TEST_CASE("find_optimistic: base case returns the source constraint unchanged") {
    const Assignment planted = gen_planted(8, 77);
    auto src = planted::testing::singleton_source(planted);
    const auto pool = full_pool(8);
    const VarTuple t({1, 5});
    const auto direct = src.query(t);
    const auto via = find_optimistic(src, t, 0.05, 2, pool, 1, nullptr);
    CHECK(via == *direct);
}

TEST_CASE("find_optimistic: singleton constraints exclude the planted negation") {
    // planted[5] = T here, so the surviving value is the planted one
    Assignment planted(9);
    planted.set_all(false);
    planted.set(5, true);
    auto src = planted::testing::singleton_source(planted);
    const auto pool = full_pool(9);
    const auto c = find_optimistic(src, VarTuple({5}), 0.05, 2, pool, 7, nullptr);
    CHECK(c.allowed_count() == 1);
    CHECK(c.contains(pa("T")));       // planted value survives
    CHECK_FALSE(c.contains(pa("F")));  // its negation is the stripped optimistic value
}

TEST_CASE("find_optimistic: deterministic per (tuple, phase seed) and cache-consistent") {
    const Assignment planted = gen_planted(30, 88);
    SimConfig cfg = sc(30, 2, 0.5, 0.0, 400, Adversary::random_independent(), 88);
    ConstraintProvider provider(cfg, planted);
    const auto pool = full_pool(30);

    OptimisticCache cache;
    const auto a = find_optimistic(provider, VarTuple({3}), 0.01, 2, pool, 42, &cache);
    const auto b = find_optimistic(provider, VarTuple({3}), 0.01, 2, pool, 42, nullptr);
    const auto c = find_optimistic(provider, VarTuple({3}), 0.01, 2, pool, 42, &cache);
    CHECK(a == b);
    CHECK(a == c);
    const auto other_phase = find_optimistic(provider, VarTuple({3}), 0.01, 2, pool, 43, nullptr);
    CHECK(other_phase.arity() == 1);  // may or may not equal a; only shape is guaranteed
}

TEST_CASE("efficient_ascend: entry at i = r0 fails closed") {
    const Assignment planted = gen_planted(10, 5);
    auto src = planted::testing::singleton_source(planted);
    VerifiedOracle oracle(planted, 5);
    const auto pool = full_pool(10);
    const RecoveryConfig cfg = rc(2, 0.2, 0.1);
    const auto plan = RoundPlan::make(cfg, 10, 10);
    const auto res = efficient_ascend(src, oracle, pool, 2, VarTuple({0, 1}), pa("TF"), plan,
                                      cfg, 10, 1, nullptr);
    REQUIRE_FALSE(res.ok());
    CHECK(res.fail->kind == FailKind::AscendFail);
    CHECK(oracle.used() == 0);  // failed before drawing anything
}

TEST_CASE("efficient_ascend: a verified optimistic value commits a large matching block") {
    // noiseless constraints; pick a variable whose planted value is F so the
    // verified value is exactly the stripped optimistic assignment
    Assignment planted = gen_planted(40, 91);
    planted.set(0, false);
    auto src = planted::testing::singleton_source(planted);
    VerifiedOracle oracle(planted, 91);
    const auto pool = full_pool(40);
    const RecoveryConfig cfg = rc(2, 0.2, 0.1);
    const auto plan = RoundPlan::make(cfg, 40, 40);

    OptimisticCache cache;
    const auto res = efficient_ascend(src, oracle, pool, 1, VarTuple({0}), pa("F"), plan, cfg,
                                      40, 17, &cache);
    REQUIRE(res.ok());
    CHECK(res.commits.size() * 8 >= pool.size());  // >= |X| / 2^(r0+1)
    for (auto [v, val] : res.commits) CHECK(val == planted.test(v));
    CHECK(res.depth == 1);
}

TEST_CASE("recover_efficient: noiseless instances recover exactly at scale") {
    SimConfig cfg = sc(10000, 2, 1.0, 0.0, 64, Adversary::random_independent(), 123);
    const Assignment planted = gen_planted(10000, 123);
    ConstraintProvider provider(cfg, planted);
    VerifiedOracle oracle(planted, 123);
    const RecoveryConfig cfg_r = rc(2, 0.1, 0.1);
    const auto out = recover_efficient(provider, oracle, cfg_r, 9001);
    CHECK_FALSE(out.failed());
    CHECK(hamming_error(out.assignment, planted) == 0.0);
    CHECK(out.verified_used == oracle.used());
    // total verified draws stay under the plan's call bound times its
    // largest per-call batch
    const auto plan = RoundPlan::make(cfg_r, 10000, 10000);
    CHECK(out.verified_used <=
          plan.total_verify_calls * plan.ascend_batch(cfg_r.r0 - 1));
    check_progress(out, 10000, 2);
    // phase count stays under the geometric-progress bound
    const double rate = 1.0 - 1.0 / std::ldexp(1.0, cfg_r.r0 + 1);
    const int bound =
        static_cast<int>(std::ceil(std::log(2.0 / cfg_r.epsilon) / -std::log(rate)));
    CHECK(out.phases <= bound);
}

TEST_CASE("recover_efficient: r0=3 with noisy good reviewers") {
    SimConfig cfg = sc(60, 3, 0.4, 0.1, 3000, Adversary::random_independent(), 314);
    const Assignment planted = gen_planted(60, 314);
    ConstraintProvider provider(cfg, planted);
    VerifiedOracle oracle(planted, 314);
    const RecoveryConfig cfg_r = rc(3, 0.15, 0.1);
    const auto out = recover_efficient(provider, oracle, cfg_r, 2718);
    CHECK_FALSE(out.failed());
    CHECK(hamming_error(out.assignment, planted) <= cfg_r.epsilon);
    CHECK(out.max_ascend_depth <= 2);  // never past arity r0-1 on sound data
}

TEST_CASE("recover_efficient: determinism") {
    const auto run = [] {
        SimConfig cfg = sc(80, 2, 0.35, 0.0, 800, Adversary::random_independent(), 42);
        const Assignment planted = gen_planted(80, 42);
        ConstraintProvider provider(cfg, planted);
        VerifiedOracle oracle(planted, 42);
        return recover_efficient(provider, oracle, rc(2, 0.1, 0.1), 777);
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.assignment == b.assignment);
    CHECK(a.verified_used == b.verified_used);
    CHECK(a.phases == b.phases);
    CHECK(a.phase_commits == b.phase_commits);
}

TEST_CASE("recover_efficient: uniform-noise data yields structured failure, not answers") {
    SimConfig cfg = sc(60, 2, 0.25, 0.0, 2000, Adversary::uniform_cover(), 1001);
    const Assignment planted = gen_planted(60, 1001);
    ConstraintProvider provider(cfg, planted);
    VerifiedOracle oracle(planted, 1001);
    const auto out = recover_efficient(provider, oracle, rc(2, 0.1, 0.1), 31337);
    CHECK(out.failed());
    CHECK_FALSE(out.fail_events.empty());

    // with one retry allowed, the retried FAIL is also on the record
    ConstraintProvider provider2(sc(60, 2, 0.25, 0.0, 2000, Adversary::uniform_cover(), 1001),
                                 planted);
    VerifiedOracle oracle2(planted, 1001);
    RecoveryConfig with_retry = rc(2, 0.1, 0.1);
    with_retry.max_phase_retries = 1;
    const auto out2 = recover_efficient(provider2, oracle2, with_retry, 31337);
    CHECK(out2.failed());
    CHECK(out2.fail_events.size() >= 2);
}

TEST_CASE("oracle firewall: recovery follows the oracle, not hidden truth") {
    // Example-1 data admits two clusters; a lying oracle steers the output
    // to its own story, proving recovery reads truth only via sample_batch
    auto src = planted::testing::example1_source();
    Assignment truth(16);
    truth.set_all(true);
    Assignment lie = truth.complement();
    VerifiedOracle lying_oracle(lie, 21);
    const auto out = recover_efficient(src, lying_oracle, rc(2, 0.2, 0.1), 5);
    CHECK_FALSE(out.failed());
    CHECK(hamming_error(out.assignment, lie) == 0.0);
    CHECK(hamming_error(out.assignment, truth) == 1.0);
}

TEST_CASE("tier agreement on small noiseless instances") {
    for (const std::uint64_t seed : {61ULL, 62ULL}) {
        SimConfig cfg = sc(14, 2, 1.0, 0.0, 200, Adversary::random_independent(), seed);
        const Assignment planted = gen_planted(14, seed);
        ConstraintProvider provider(cfg, planted);
        const RecoveryConfig cfg_r = rc(2, 0.2, 0.1);

        VerifiedOracle o1(planted, seed);
        const auto r2 = recover_r2(provider, o1, cfg_r);
        VerifiedOracle o2(planted, seed + 100);
        const auto basic = recover_basic(provider, o2, cfg_r);
        VerifiedOracle o3(planted, seed + 200);
        const auto eff = recover_efficient(provider, o3, cfg_r, seed);

        const double eps_n = cfg_r.epsilon;
        CHECK(hamming_error(r2.assignment, planted) <= eps_n);
        CHECK(hamming_error(basic.assignment, planted) <= eps_n);
        CHECK(hamming_error(eff.assignment, planted) <= eps_n);
        CHECK(hamming_error(r2.assignment, basic.assignment) <= 2 * eps_n);
        CHECK(hamming_error(r2.assignment, eff.assignment) <= 2 * eps_n);
        CHECK(hamming_error(basic.assignment, eff.assignment) <= 2 * eps_n);
    }
}

TEST_CASE("verified budget is flat in n (paired seeds, quick check)") {
    const RecoveryConfig cfg_r = rc(2, 0.1, 0.1);
    std::vector<double> small_used, large_used;
    for (const std::uint64_t seed : {501ULL, 502ULL, 503ULL, 504ULL, 505ULL}) {
        for (const std::size_t n : {100UL, 400UL}) {
            SimConfig cfg = sc(n, 2, 0.35, 0.0, 800, Adversary::random_independent(), seed);
            const Assignment planted = gen_planted(n, seed);
            ConstraintProvider provider(cfg, planted);
            VerifiedOracle oracle(planted, seed);
            const auto out = recover_efficient(provider, oracle, cfg_r, seed);
            CHECK_FALSE(out.failed());
            (n == 100 ? small_used : large_used)
                .push_back(static_cast<double>(out.verified_used));
        }
    }
    for (std::size_t i = 0; i < small_used.size(); ++i) {
        CHECK(large_used[i] <= 2.0 * small_used[i]);
        CHECK(small_used[i] <= 2.0 * large_used[i]);
    }
}
