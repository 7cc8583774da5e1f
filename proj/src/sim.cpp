#include "planted/sim.hpp"

#include <cmath>

namespace planted {

std::string Adversary::to_string() const {
    switch (kind) {
        case AdversaryKind::UniformCover: return "uniform_cover";
        case AdversaryKind::ConstantVector: return "constant_vector:" + pattern.to_tf();
        case AdversaryKind::AntiPlanted: return "anti_planted";
        case AdversaryKind::RandomIndependent: return "random_independent";
    }
    return "?";
}

Adversary Adversary::parse(const std::string& s, int r0) {
    if (s == "uniform_cover") return uniform_cover();
    if (s == "anti_planted") return anti_planted();
    if (s == "random_independent") return random_independent();
    const std::string prefix = "constant_vector:";
    if (s.rfind(prefix, 0) == 0) {
        const std::string pat = s.substr(prefix.size());
        if (static_cast<int>(pat.size()) != r0)
            throw ConfigError("constant_vector pattern length must equal r0");
        for (char c : pat)
            if (c != 'T' && c != 'F')
                throw ConfigError("constant_vector pattern must be T/F characters");
        return constant_vector(PartialAssignment::from_tf(pat));
    }
    throw ConfigError("unknown adversary '" + s + "'");
}

void SimConfig::validate() const {
    if (n < 1) throw ConfigError("sim.n must be >= 1");
    if (r0 < 2) throw ConfigError("sim.r0 must be >= 2");
    if (r0 > VarTuple::kMaxArity) throw ConfigError("sim.r0 exceeds arity cap");
    if (static_cast<std::size_t>(r0) > n) throw ConfigError("sim.r0 must not exceed n");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("sim.alpha must be in (0,1]");
    if (!(p >= 0.0 && p < 0.5)) throw ConfigError("sim.p must be in [0, 0.5)");
    if (m_per_tuple < 1) throw ConfigError("sim.m_per_tuple must be >= 1");
    if (adversary.kind == AdversaryKind::ConstantVector && adversary.pattern.size() != r0)
        throw ConfigError("constant_vector pattern length must equal r0");
    if (adversary.kind == AdversaryKind::UniformCover) {
        // Feasible iff alpha * max_v G(v) <= 2^-r0, and G peaks at the
        // planted restriction with mass (1-p)^r0.
        const double peak = alpha * std::pow(1.0 - p, r0);
        const double cell = std::ldexp(1.0, -r0);
        if (peak > cell * (1.0 + 1e-12))
            throw AdversaryInfeasible(
                "uniform_cover infeasible: alpha*(1-p)^r0 = " + std::to_string(peak) +
                " exceeds 1/2^r0 = " + std::to_string(cell));
    }
}

std::uint64_t default_m_per_tuple(int r0, std::size_t n) {
    const double ln_n = std::log(static_cast<double>(n < 2 ? 2 : n));
    return static_cast<std::uint64_t>(std::ceil(50.0 * std::ldexp(1.0, r0) * ln_n));
}

std::optional<std::uint64_t> chernoff_sufficient_m(double alpha, double p, int r0,
                                                   std::size_t n) {
    const double q = alpha * std::pow(1.0 - p, r0);  // worst-case planted-vector frequency
    const double cell = std::ldexp(1.0, -r0);
    const double margin = q - cell;
    if (margin <= 0.0) return std::nullopt;
    const double ln_n = std::log(static_cast<double>(n < 2 ? 2 : n));
    // P[Bin(m, q) <= m*cell] <= exp(-m*margin^2 / (2q)) <= 1/n^2.
    return static_cast<std::uint64_t>(std::ceil(4.0 * q * ln_n / (margin * margin)));
}

Assignment gen_planted(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(SeedChain(seed).with("planted").value());
    Assignment a(n);
    for (std::size_t i = 0; i < n; ++i) a.set(i, rng.next() & 1ULL);
    return a;
}

std::optional<ConstraintSet> build_constraint(const ReviewBatch& batch) {
    const int r = batch.tuple.arity();
    const std::uint64_t cells = std::uint64_t{1} << r;
    BitVec allowed(cells);
    bool any = false;
    for (std::uint64_t v = 0; v < cells; ++v) {
        // count/m > 1/2^r, strict, in exact integer arithmetic
        if (batch.counts[v] << r > batch.total) {
            allowed.set(v);
            any = true;
        }
    }
    if (!any) return std::nullopt;
    return ConstraintSet(batch.tuple, std::move(allowed));
}

ConstraintProvider::ConstraintProvider(SimConfig cfg, Assignment planted)
    : cfg_(std::move(cfg)), planted_(std::move(planted)) {
    cfg_.validate();
    if (planted_.size() != cfg_.n)
        throw LengthMismatch("ConstraintProvider: planted length does not match n");
}

std::vector<double> ConstraintProvider::mixture(const VarTuple& t,
                                                PartialAssignment& planted_restriction) const {
    const int r = t.arity();
    const std::uint64_t cells = std::uint64_t{1} << r;

    std::uint32_t pi = 0;
    for (int j = 0; j < r; ++j)
        if (planted_.test(t[j])) pi |= 1U << j;
    planted_restriction = PartialAssignment(pi, r);

    // Good-reviewer distribution: planted restriction with independent
    // per-bit flips at rate p.
    std::vector<double> good(cells);
    for (std::uint64_t v = 0; v < cells; ++v) {
        const int d = std::popcount(static_cast<std::uint32_t>(v) ^ pi);
        good[v] = std::pow(cfg_.p, d) * std::pow(1.0 - cfg_.p, r - d);
    }

    std::vector<double> bad(cells, 0.0);
    const double cell = 1.0 / static_cast<double>(cells);
    switch (cfg_.adversary.kind) {
        case AdversaryKind::UniformCover:
            // The unique complement making the overall mixture uniform:
            // B = (U - alpha*G) / (1 - alpha). Feasibility checked upfront.
            for (std::uint64_t v = 0; v < cells; ++v) {
                double b = (cell - cfg_.alpha * good[v]) / (1.0 - cfg_.alpha);
                bad[v] = b < 0.0 ? 0.0 : b;
            }
            break;
        case AdversaryKind::ConstantVector:
            bad[cfg_.adversary.pattern.mask()] = 1.0;
            break;
        case AdversaryKind::AntiPlanted:
            bad[~pi & (cells - 1)] = 1.0;
            break;
        case AdversaryKind::RandomIndependent:
            for (std::uint64_t v = 0; v < cells; ++v) bad[v] = cell;
            break;
    }

    std::vector<double> q(cells);
    double sum = 0.0;
    for (std::uint64_t v = 0; v < cells; ++v) {
        q[v] = cfg_.alpha * good[v] + (1.0 - cfg_.alpha) * bad[v];
        sum += q[v];
    }
    for (auto& x : q) x /= sum;
    return q;
}

ReviewBatch ConstraintProvider::sample_reviews(const VarTuple& t) const {
    if (t.arity() != cfg_.r0)
        throw ArityMismatch("sample_reviews: tuple arity must equal r0");
    for (VarId v : t.vars())
        if (v >= cfg_.n) throw SubsetViolation("sample_reviews: variable out of range");

    PartialAssignment pi;
    const std::vector<double> q = mixture(t, pi);

    SeedChain chain(cfg_.seed);
    chain.with("reviews");
    for (VarId v : t.vars()) chain.with(std::uint64_t{v} + 1);
    SplitMix64 rng(chain.value());

    ReviewBatch batch;
    batch.tuple = t;
    batch.total = cfg_.m_per_tuple;
    batch.counts.resize(q.size());
    multinomial_counts(rng, cfg_.m_per_tuple, q, batch.counts);
    return batch;
}

std::optional<ConstraintSet> ConstraintProvider::query(const VarTuple& t) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
    }

    std::optional<ConstraintSet> built = build_constraint(sample_reviews(t));

    PartialAssignment pi;
    {
        std::uint32_t bits = 0;
        for (int j = 0; j < t.arity(); ++j)
            if (planted_.test(t[j])) bits |= 1U << j;
        pi = PartialAssignment(bits, t.arity());
    }

    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = cache_.try_emplace(t, std::move(built));
    if (inserted) {
        // Count diagnostics once per tuple, on first materialization.
        if (!it->second.has_value())
            empties_.fetch_add(1);
        else if (!it->second->contains(pi))
            breaches_.fetch_add(1);
    }
    return it->second;
}

std::size_t ConstraintProvider::cached_tuples() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.size();
}

}  // namespace planted
