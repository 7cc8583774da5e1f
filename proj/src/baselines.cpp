#include "planted/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace planted {

bool SolutionSet::contains(const Assignment& a) const {
    return std::find(assignments.begin(), assignments.end(), a) != assignments.end();
}

namespace {

constexpr std::size_t kEnumerationCap = 24;

struct Enumerator {
    std::size_t n;
    // Constraints bucketed by their highest variable, checked as soon as the
    // prefix covers them.
    std::vector<std::vector<const ConstraintSet*>> by_last;
    std::vector<std::vector<std::vector<int>>> positions;  // tuple positions, same shape
    Assignment current;
    std::vector<Assignment> found;

    bool satisfied_at(std::size_t depth) {
        const auto& cons = by_last[depth];
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const ConstraintSet& c = *cons[i];
            std::uint32_t bits = 0;
            int j = 0;
            for (const VarId v : c.tuple().vars()) {
                if (current.test(v)) bits |= 1U << j;
                ++j;
            }
            if (!c.contains(PartialAssignment(bits, c.arity()))) return false;
        }
        return true;
    }

    void dfs(std::size_t depth) {
        if (depth == n) {
            found.push_back(current);
            return;
        }
        for (const bool value : {false, true}) {
            current.set(depth, value);
            if (satisfied_at(depth)) dfs(depth + 1);
        }
        current.set(depth, false);
    }
};

}  // namespace

SolutionSet enumerate_satisfying(std::span<const ConstraintSet> constraints, std::size_t n) {
    if (n > kEnumerationCap)
        throw TooLarge("enumerate_satisfying: n = " + std::to_string(n) + " exceeds cap " +
                       std::to_string(kEnumerationCap));

    Enumerator e;
    e.n = n;
    e.by_last.resize(n);
    e.current = Assignment(n);
    for (const auto& c : constraints) {
        if (c.arity() < 1) continue;
        const VarId last = c.tuple()[c.arity() - 1];
        if (last >= n)
            throw SubsetViolation("enumerate_satisfying: constraint variable out of range");
        e.by_last[last].push_back(&c);
    }
    // F-branch explored before T at every depth, so output is already in
    // lexicographic order.
    e.dfs(0);
    return SolutionSet{std::move(e.found)};
}

std::vector<ConstraintSet> materialize_constraints(ConstraintSource& source, std::size_t n,
                                                   int r0) {
    std::vector<ConstraintSet> out;
    std::vector<int> idx(static_cast<std::size_t>(r0));
    for (int i = 0; i < r0; ++i) idx[static_cast<std::size_t>(i)] = i;
    if (static_cast<std::size_t>(r0) > n) return out;
    for (;;) {
        std::vector<VarId> vars;
        vars.reserve(static_cast<std::size_t>(r0));
        for (int i : idx) vars.push_back(static_cast<VarId>(i));
        VarTuple t(vars);
        auto c = source.query(t);
        if (!c) throw EmptyConstraintError("no constraint for tuple " + t.to_string());
        out.push_back(std::move(*c));
        int i = r0 - 1;
        while (i >= 0 &&
               idx[static_cast<std::size_t>(i)] == static_cast<int>(n) - r0 + i)
            --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < r0; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

Assignment vc_recover(const SolutionSet& solutions, VerifiedOracle& oracle, std::size_t k) {
    if (solutions.empty()) throw ConfigError("vc_recover: empty solution set");
    if (k < 1) throw ConfigError("vc_recover: k must be >= 1");

    const auto samples = oracle.sample_batch(k);

    // Solutions are scanned in lexicographic order; keeping strict
    // improvement makes ties resolve to the lexicographically smallest.
    std::vector<const Assignment*> ordered;
    ordered.reserve(solutions.size());
    for (const auto& a : solutions.assignments) ordered.push_back(&a);
    std::sort(ordered.begin(), ordered.end(),
              [](const Assignment* a, const Assignment* b) { return a->lex_less(*b); });

    const Assignment* best = nullptr;
    std::size_t best_score = 0;
    for (const Assignment* a : ordered) {
        std::size_t score = 0;
        for (auto [v, val] : samples)
            if (a->test(v) == val) ++score;
        if (!best || score > best_score) {
            best = a;
            best_score = score;
        }
    }
    return *best;
}

std::size_t vc_sample_bound(int r0, double epsilon, double delta, double multiplier) {
    const double k = multiplier * (1.0 / epsilon) *
                     (r0 * std::log(1.0 / epsilon) + std::log(1.0 / delta));
    return static_cast<std::size_t>(std::max(1.0, std::ceil(k)));
}

std::size_t cluster_count(const SolutionSet& solutions, double epsilon) {
    if (solutions.empty()) throw ConfigError("cluster_count: empty solution set");

    std::vector<const Assignment*> ordered;
    ordered.reserve(solutions.size());
    for (const auto& a : solutions.assignments) ordered.push_back(&a);
    std::sort(ordered.begin(), ordered.end(),
              [](const Assignment* a, const Assignment* b) { return a->lex_less(*b); });

    const double radius =
        epsilon * static_cast<double>(ordered.front()->size()) + 1e-9;
    std::vector<bool> covered(ordered.size(), false);
    std::size_t centers = 0;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        if (covered[i]) continue;
        ++centers;
        for (std::size_t j = i; j < ordered.size(); ++j) {
            if (covered[j]) continue;
            if (static_cast<double>(ordered[i]->hamming(*ordered[j])) <= radius)
                covered[j] = true;
        }
    }
    return centers;
}

Assignment majority_baseline(ConstraintProvider& provider, std::size_t n) {
    const SimConfig& cfg = provider.config();
    const int r0 = cfg.r0;
    std::vector<std::uint64_t> votes_t(n, 0), votes_f(n, 0);

    for (std::size_t v = 0; v < n; ++v) {
        SplitMix64 rng(SeedChain(cfg.seed).with("majority").with(static_cast<std::uint64_t>(v)).value());
        std::vector<VarId> members{static_cast<VarId>(v)};
        while (static_cast<int>(members.size()) < r0) {
            const auto cand = static_cast<VarId>(rng.below(n));
            if (std::find(members.begin(), members.end(), cand) == members.end())
                members.push_back(cand);
        }
        const VarTuple t(members);
        const ReviewBatch batch = provider.sample_reviews(t);
        const std::uint64_t cells = std::uint64_t{1} << r0;
        for (std::uint64_t cell = 0; cell < cells; ++cell) {
            const std::uint64_t c = batch.counts[cell];
            if (!c) continue;
            for (int j = 0; j < r0; ++j) {
                const VarId member = t[j];
                if ((cell >> j) & 1)
                    votes_t[member] += c;
                else
                    votes_f[member] += c;
            }
        }
    }

    Assignment out(n);
    for (std::size_t v = 0; v < n; ++v) out.set(v, votes_t[v] >= votes_f[v]);
    return out;
}

}  // namespace planted
