#include "planted/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "planted/baselines.hpp"

namespace planted {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) throw ConfigError(context + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
T get_required(const json& j, const char* key, const std::string& context) {
    if (!j.contains(key)) throw ConfigError(context + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(context + ": bad value for '" + std::string(key) + "': " + e.what());
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(context + ": bad value for '" + std::string(key) + "': " + e.what());
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t mid = xs.size() / 2;
    if (xs.size() % 2 == 1) return xs[mid];
    return 0.5 * (xs[mid - 1] + xs[mid]);
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out.flush()) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename to '" + path + "' failed: " + ec.message());
}

}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::R2: return "r2";
        case Algorithm::Basic: return "basic";
        case Algorithm::Efficient: return "efficient";
        case Algorithm::Vc: return "vc";
        case Algorithm::Majority: return "majority";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "r2") return Algorithm::R2;
    if (s == "basic") return Algorithm::Basic;
    if (s == "efficient") return Algorithm::Efficient;
    if (s == "vc") return Algorithm::Vc;
    if (s == "majority") return Algorithm::Majority;
    throw ConfigError("unknown algorithm '" + s + "'");
}

void ExperimentConfig::validate() const {
    sim.validate();
    recovery.validate();
    if (sim.r0 != recovery.r0)
        throw ConfigError("sim.r0 and recovery.r0 must agree");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    switch (algorithm) {
        case Algorithm::R2:
            if (sim.r0 != 2) throw ConfigError("algorithm r2 requires r0 == 2");
            break;
        case Algorithm::Basic:
            if (sim.n > recovery.basic_n_cap)
                throw ConfigError("algorithm basic requires n <= basic_n_cap (" +
                                  std::to_string(recovery.basic_n_cap) + ")");
            break;
        case Algorithm::Vc:
            if (sim.n > 24) throw ConfigError("algorithm vc requires n <= 24 (exhaustive set)");
            break;
        default:
            break;
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    json j;
    j["sim"] = {{"n", sim.n},
                {"r0", sim.r0},
                {"alpha", sim.alpha},
                {"p", sim.p},
                {"m_per_tuple", sim.m_per_tuple},
                {"adversary", sim.adversary.to_string()},
                {"seed", sim.seed}};
    j["recovery"] = {{"r0", recovery.r0},
                     {"epsilon", recovery.epsilon},
                     {"delta", recovery.delta},
                     {"max_phase_retries", recovery.max_phase_retries},
                     {"basic_n_cap", recovery.basic_n_cap}};
    j["algorithm"] = to_string(algorithm);
    j["trials"] = trials;
    j["base_seed"] = base_seed;
    j["output_path"] = output_path;
    return j;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    check_keys(j, {"sim", "recovery", "algorithm", "trials", "base_seed", "output_path"},
               "config");
    if (!j.contains("sim")) throw ConfigError("config: missing 'sim'");
    if (!j.contains("recovery")) throw ConfigError("config: missing 'recovery'");

    ExperimentConfig cfg;
    const json& sim = j.at("sim");
    check_keys(sim, {"n", "r0", "alpha", "p", "m_per_tuple", "adversary", "seed"}, "sim");
    cfg.sim.n = get_required<std::size_t>(sim, "n", "sim");
    cfg.sim.r0 = get_required<int>(sim, "r0", "sim");
    cfg.sim.alpha = get_required<double>(sim, "alpha", "sim");
    cfg.sim.p = get_or<double>(sim, "p", 0.0, "sim");
    cfg.sim.m_per_tuple =
        get_or<std::uint64_t>(sim, "m_per_tuple", default_m_per_tuple(cfg.sim.r0, cfg.sim.n), "sim");
    cfg.sim.adversary =
        Adversary::parse(get_or<std::string>(sim, "adversary", "random_independent", "sim"),
                         cfg.sim.r0);
    cfg.sim.seed = get_or<std::uint64_t>(sim, "seed", 0, "sim");

    const json& rec = j.at("recovery");
    check_keys(rec, {"r0", "epsilon", "delta", "max_phase_retries", "basic_n_cap"}, "recovery");
    cfg.recovery.r0 = get_or<int>(rec, "r0", cfg.sim.r0, "recovery");
    cfg.recovery.epsilon = get_required<double>(rec, "epsilon", "recovery");
    cfg.recovery.delta = get_required<double>(rec, "delta", "recovery");
    cfg.recovery.max_phase_retries = get_or<int>(rec, "max_phase_retries", 0, "recovery");
    cfg.recovery.basic_n_cap = get_or<std::size_t>(rec, "basic_n_cap", 40, "recovery");

    cfg.algorithm = parse_algorithm(get_or<std::string>(j, "algorithm", "efficient", "config"));
    cfg.trials = get_or<std::uint64_t>(j, "trials", 1, "config");
    cfg.base_seed = get_or<std::uint64_t>(j, "base_seed", 0, "config");
    cfg.output_path = get_or<std::string>(j, "output_path", "", "config");
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_experiment_config(j);
}

nlohmann::json TrialReport::to_json() const {
    json fails = json::array();
    for (const auto& f : fail_events)
        fails.push_back({{"kind", to_string(f.kind)},
                         {"phase", f.phase},
                         {"level", f.level},
                         {"detail", f.detail}});
    return json{{"trial_index", trial_index},
                {"seed", seed},
                {"error_fraction", error_fraction},
                {"verified_used", verified_used},
                {"phases", phases},
                {"max_ascend_depth", max_ascend_depth},
                {"fail_events", std::move(fails)},
                {"aborted", aborted},
                {"soundness_breaches", soundness_breaches},
                {"empty_constraints", empty_constraints},
                {"wall_time_ms", wall_time_ms},
                {"config_echo", config_echo}};
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
    return mix64(base_seed, trial_index);
}

TrialReport run_trial(const ExperimentConfig& cfg, std::uint64_t trial_index) {
    cfg.validate();
    const std::uint64_t seed = trial_seed(cfg.base_seed, trial_index);

    SimConfig sim = cfg.sim;
    sim.seed = seed;
    const Assignment planted = gen_planted(sim.n, seed);
    ConstraintProvider provider(sim, planted);
    VerifiedOracle oracle(planted, seed);
    const std::uint64_t algo_seed = SeedChain(seed).with("algorithm").value();

    TrialReport report;
    report.trial_index = trial_index;
    report.seed = seed;
    report.config_echo = cfg.to_json();
    report.config_echo["trial_index"] = trial_index;

    const auto start = std::chrono::steady_clock::now();

    Assignment output(sim.n);
    switch (cfg.algorithm) {
        case Algorithm::R2: {
            RecoveryOutcome out = recover_r2(provider, oracle, cfg.recovery);
            report.phases = out.phases;
            report.max_ascend_depth = out.max_ascend_depth;
            report.fail_events = out.fail_events;
            report.aborted = out.aborted;
            output = std::move(out.assignment);
            break;
        }
        case Algorithm::Basic: {
            RecoveryOutcome out = recover_basic(provider, oracle, cfg.recovery);
            report.phases = out.phases;
            report.max_ascend_depth = out.max_ascend_depth;
            report.fail_events = out.fail_events;
            report.aborted = out.aborted;
            output = std::move(out.assignment);
            break;
        }
        case Algorithm::Efficient: {
            RecoveryOutcome out = recover_efficient(provider, oracle, cfg.recovery, algo_seed);
            report.phases = out.phases;
            report.max_ascend_depth = out.max_ascend_depth;
            report.fail_events = out.fail_events;
            report.aborted = out.aborted;
            output = std::move(out.assignment);
            break;
        }
        case Algorithm::Vc: {
            try {
                const auto constraints = materialize_constraints(provider, sim.n, sim.r0);
                const SolutionSet solutions = enumerate_satisfying(constraints, sim.n);
                const std::size_t k =
                    vc_sample_bound(sim.r0, cfg.recovery.epsilon, cfg.recovery.delta);
                output = vc_recover(solutions, oracle, k);
            } catch (const EmptyConstraintError& e) {
                report.fail_events.push_back({FailKind::EmptyConstraint, 0, 0, e.what()});
                report.aborted = true;
                output.set_all(true);
            } catch (const ConfigError& e) {
                // Empty solution set: the dataset admits no satisfying
                // assignment at all, which only a breach can cause.
                report.fail_events.push_back({FailKind::EmptyConstraint, 0, 0, e.what()});
                report.aborted = true;
                output.set_all(true);
            }
            break;
        }
        case Algorithm::Majority: {
            output = majority_baseline(provider, sim.n);
            break;
        }
    }

    const auto stop = std::chrono::steady_clock::now();
    report.wall_time_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
            .count();
    report.error_fraction = hamming_error(output, planted);
    report.verified_used = oracle.used();
    report.soundness_breaches = provider.breach_count();
    report.empty_constraints = provider.empty_count();
    return report;
}

std::vector<TrialReport> run_trials(const ExperimentConfig& cfg, int jobs) {
    cfg.validate();
    const std::uint64_t count = cfg.trials;
    std::vector<TrialReport> out(count);
    const int workers =
        std::max(1, std::min<int>(jobs, static_cast<int>(std::min<std::uint64_t>(count, 64))));
    if (workers == 1) {
        for (std::uint64_t i = 0; i < count; ++i) out[i] = run_trial(cfg, i);
        return out;
    }

    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> died{false};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= count || died.load()) return;
                try {
                    out[i] = run_trial(cfg, i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    died.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

SweepRow aggregate(const ExperimentConfig& cfg, const std::vector<TrialReport>& reports) {
    SweepRow row;
    row.algorithm = to_string(cfg.algorithm);
    row.n = cfg.sim.n;
    row.r0 = cfg.sim.r0;
    row.alpha = cfg.sim.alpha;
    row.p = cfg.sim.p;
    row.m_per_tuple = cfg.sim.m_per_tuple;
    row.adversary = cfg.sim.adversary.to_string();
    row.epsilon = cfg.recovery.epsilon;
    row.delta = cfg.recovery.delta;
    row.trials = reports.size();
    if (reports.empty()) return row;

    std::vector<double> errors, used, wall;
    std::size_t successes = 0, fails = 0, breached = 0;
    double error_sum = 0.0;
    for (const auto& r : reports) {
        errors.push_back(r.error_fraction);
        used.push_back(static_cast<double>(r.verified_used));
        wall.push_back(r.wall_time_ms);
        error_sum += r.error_fraction;
        if (r.error_fraction <= cfg.recovery.epsilon) ++successes;
        if (!r.fail_events.empty()) ++fails;
        if (r.soundness_breaches > 0) ++breached;
    }
    const double denom = static_cast<double>(reports.size());
    row.success_rate = static_cast<double>(successes) / denom;
    row.median_error = median_of(errors);
    row.mean_error = error_sum / denom;
    row.median_verified_used = median_of(used);
    row.median_wall_ms = median_of(wall);
    row.fail_rate = static_cast<double>(fails) / denom;
    row.breach_rate = static_cast<double>(breached) / denom;
    return row;
}

bool SweepGrid::empty() const {
    return n.empty() && alpha.empty() && p.empty() && epsilon.empty() && m_per_tuple.empty() &&
           adversary.empty();
}

std::size_t SweepGrid::point_count() const {
    auto dim = [](std::size_t k) { return k == 0 ? std::size_t{1} : k; };
    return dim(n.size()) * dim(alpha.size()) * dim(p.size()) * dim(epsilon.size()) *
           dim(m_per_tuple.size()) * dim(adversary.size());
}

SweepGrid parse_sweep_grid(const nlohmann::json& j) {
    check_keys(j, {"n", "alpha", "p", "epsilon", "m_per_tuple", "adversary"}, "grid");
    SweepGrid g;
    auto read = [&](const char* key, auto& target) {
        if (!j.contains(key)) return;
        const json& arr = j.at(key);
        if (!arr.is_array() || arr.empty())
            throw ConfigError("grid." + std::string(key) + ": expected a nonempty array");
        for (const auto& v : arr) target.push_back(v.get<typename std::decay_t<decltype(target)>::value_type>());
    };
    read("n", g.n);
    read("alpha", g.alpha);
    read("p", g.p);
    read("epsilon", g.epsilon);
    read("m_per_tuple", g.m_per_tuple);
    read("adversary", g.adversary);
    return g;
}

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& tmpl, const SweepGrid& grid) {
    if (grid.empty()) throw ConfigError("sweep grid is empty");

    // Absent dimensions keep the template value.
    auto or_default = [](const auto& xs, auto fallback) {
        using T = std::decay_t<decltype(fallback)>;
        if (xs.empty()) return std::vector<T>{fallback};
        return std::vector<T>(xs.begin(), xs.end());
    };
    const auto ns = or_default(grid.n, tmpl.sim.n);
    const auto alphas = or_default(grid.alpha, tmpl.sim.alpha);
    const auto ps = or_default(grid.p, tmpl.sim.p);
    const auto epsilons = or_default(grid.epsilon, tmpl.recovery.epsilon);
    const auto ms = or_default(grid.m_per_tuple, tmpl.sim.m_per_tuple);
    const auto adversaries = or_default(grid.adversary, tmpl.sim.adversary.to_string());

    std::vector<ExperimentConfig> points;
    for (const auto n : ns)
        for (const auto alpha : alphas)
            for (const auto p : ps)
                for (const auto epsilon : epsilons)
                    for (const auto m : ms)
                        for (const auto& adv : adversaries) {
                            ExperimentConfig cfg = tmpl;
                            cfg.sim.n = n;
                            cfg.sim.alpha = alpha;
                            cfg.sim.p = p;
                            cfg.sim.m_per_tuple = m;
                            cfg.sim.adversary = Adversary::parse(adv, cfg.sim.r0);
                            cfg.recovery.epsilon = epsilon;
                            points.push_back(std::move(cfg));
                        }
    return points;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& tmpl, const SweepGrid& grid, int jobs) {
    const auto points = expand_grid(tmpl, grid);
    std::vector<SweepRow> rows;
    rows.reserve(points.size());
    for (const auto& point : points) {
        try {
            point.validate();
            rows.push_back(aggregate(point, run_trials(point, jobs)));
        } catch (const Error&) {
            // Point-level failure (for example an infeasible adversary at
            // this alpha): keep the row with zero trials, keep sweeping.
            rows.push_back(aggregate(point, {}));
        }
    }
    return rows;
}

ReportFormat parse_format(const std::string& s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    throw ConfigError("unknown format '" + s + "' (expected csv or json)");
}

namespace {

constexpr const char* kSweepHeader =
    "algorithm,n,r0,alpha,p,m_per_tuple,adversary,epsilon,delta,trials,success_rate,"
    "median_error,mean_error,median_verified_used,median_wall_ms,fail_rate,breach_rate";

json sweep_row_json(const SweepRow& r) {
    return json{{"algorithm", r.algorithm},
                {"n", r.n},
                {"r0", r.r0},
                {"alpha", r.alpha},
                {"p", r.p},
                {"m_per_tuple", r.m_per_tuple},
                {"adversary", r.adversary},
                {"epsilon", r.epsilon},
                {"delta", r.delta},
                {"trials", r.trials},
                {"success_rate", r.success_rate},
                {"median_error", r.median_error},
                {"mean_error", r.mean_error},
                {"median_verified_used", r.median_verified_used},
                {"median_wall_ms", r.median_wall_ms},
                {"fail_rate", r.fail_rate},
                {"breach_rate", r.breach_rate}};
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string render_report(const std::vector<SweepRow>& rows, ReportFormat format) {
    if (format == ReportFormat::Json) {
        json arr = json::array();
        for (const auto& r : rows) arr.push_back(sweep_row_json(r));
        return arr.dump(2) + "\n";
    }
    std::ostringstream os;
    os << kSweepHeader << "\n";
    for (const auto& r : rows) {
        os << r.algorithm << ',' << r.n << ',' << r.r0 << ',' << format_double(r.alpha) << ','
           << format_double(r.p) << ',' << r.m_per_tuple << ',' << r.adversary << ','
           << format_double(r.epsilon) << ',' << format_double(r.delta) << ',' << r.trials << ','
           << format_double(r.success_rate) << ',' << format_double(r.median_error) << ','
           << format_double(r.mean_error) << ',' << format_double(r.median_verified_used) << ','
           << format_double(r.median_wall_ms) << ',' << format_double(r.fail_rate) << ','
           << format_double(r.breach_rate) << "\n";
    }
    return os.str();
}

void emit_report(const std::vector<SweepRow>& rows, ReportFormat format,
                 const std::string& path) {
    if (rows.empty()) throw ConfigError("emit_report: no rows");
    write_atomic(path, render_report(rows, format));
}

std::vector<SweepRow> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("parse_report_csv: empty input");
    if (line != kSweepHeader) throw ConfigError("parse_report_csv: unexpected header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 17) throw ConfigError("parse_report_csv: bad field count");
        SweepRow r;
        r.algorithm = f[0];
        r.n = std::stoull(f[1]);
        r.r0 = std::stoi(f[2]);
        r.alpha = std::stod(f[3]);
        r.p = std::stod(f[4]);
        r.m_per_tuple = std::stoull(f[5]);
        r.adversary = f[6];
        r.epsilon = std::stod(f[7]);
        r.delta = std::stod(f[8]);
        r.trials = std::stoull(f[9]);
        r.success_rate = std::stod(f[10]);
        r.median_error = std::stod(f[11]);
        r.mean_error = std::stod(f[12]);
        r.median_verified_used = std::stod(f[13]);
        r.median_wall_ms = std::stod(f[14]);
        r.fail_rate = std::stod(f[15]);
        r.breach_rate = std::stod(f[16]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string render_trials(const std::vector<TrialReport>& reports, ReportFormat format) {
    if (format == ReportFormat::Json) {
        json arr = json::array();
        for (const auto& r : reports) arr.push_back(r.to_json());
        return arr.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "trial_index,seed,error_fraction,verified_used,phases,fails,aborted,"
          "soundness_breaches,empty_constraints,wall_time_ms\n";
    for (const auto& r : reports) {
        std::string fails;
        for (const auto& f : r.fail_events) {
            if (!fails.empty()) fails += ';';
            fails += to_string(f.kind);
        }
        os << r.trial_index << ',' << r.seed << ',' << format_double(r.error_fraction) << ','
           << r.verified_used << ',' << r.phases << ',' << fails << ','
           << (r.aborted ? 1 : 0) << ',' << r.soundness_breaches << ',' << r.empty_constraints
           << ',' << format_double(r.wall_time_ms) << "\n";
    }
    return os.str();
}

void emit_trials(const std::vector<TrialReport>& reports, ReportFormat format,
                 const std::string& path) {
    if (reports.empty()) throw ConfigError("emit_trials: no reports");
    write_atomic(path, render_trials(reports, format));
}

}  // namespace planted
