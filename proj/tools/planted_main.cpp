#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "planted/baselines.hpp"
#include "planted/harness.hpp"

namespace {

using nlohmann::json;
using namespace planted;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFailRate = 2;
constexpr int kExitIo = 3;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
    std::string out;
    int jobs = 1;
    double max_fail_rate = 1.0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_fail_rate = true) {
    cmd->add_option("--config", opts.config_path, "JSON config file")->required();
    cmd->add_option("--seed", opts.seed, "override base_seed");
    cmd->add_option("--format", opts.format, "output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", opts.out, "output path (stdout when omitted)");
    cmd->add_option("--jobs", opts.jobs, "concurrent trials")->check(CLI::PositiveNumber);
    if (with_fail_rate)
        cmd->add_option("--max-fail-rate", opts.max_fail_rate,
                        "exit 2 when the FAIL rate exceeds this");
}

void write_output(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path + ".tmp", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + out_path + ".tmp'");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + out_path + "'");
    out.close();
    std::error_code ec;
    std::filesystem::rename(out_path + ".tmp", out_path, ec);
    if (ec) throw IoError("rename to '" + out_path + "' failed: " + ec.message());
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

std::vector<VarTuple> parse_tuple_list(const std::string& arg) {
    std::vector<VarTuple> tuples;
    std::istringstream groups(arg);
    std::string group;
    while (std::getline(groups, group, ';')) {
        if (group.empty()) continue;
        std::vector<VarId> vars;
        std::istringstream items(group);
        std::string item;
        while (std::getline(items, item, ',')) vars.push_back(static_cast<VarId>(std::stoul(item)));
        tuples.emplace_back(vars);
    }
    return tuples;
}

// First `count` tuples in lexicographic order.
std::vector<VarTuple> leading_tuples(std::size_t n, int r0, std::size_t count) {
    std::vector<VarTuple> tuples;
    std::vector<int> idx(static_cast<std::size_t>(r0));
    for (int i = 0; i < r0; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (tuples.size() < count) {
        std::vector<VarId> vars;
        for (int i : idx) vars.push_back(static_cast<VarId>(i));
        tuples.emplace_back(vars);
        int i = r0 - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == static_cast<int>(n) - r0 + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < r0; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return tuples;
}

int cmd_simulate(const CommonOpts& opts, const std::string& tuple_list_arg) {
    ExperimentConfig cfg = load_experiment_config(opts.config_path);
    if (opts.seed) cfg.base_seed = *opts.seed;

    const std::uint64_t seed = trial_seed(cfg.base_seed, 0);
    SimConfig sim = cfg.sim;
    sim.seed = seed;
    const Assignment planted = gen_planted(sim.n, seed);
    ConstraintProvider provider(sim, planted);

    std::vector<VarTuple> tuples = tuple_list_arg.empty()
                                       ? leading_tuples(sim.n, sim.r0, 10)
                                       : parse_tuple_list(tuple_list_arg);

    json out;
    out["config"] = cfg.to_json();
    out["seed"] = seed;
    json snaps = json::array();
    for (const auto& t : tuples) {
        json snap;
        json vars = json::array();
        for (VarId v : t.vars()) vars.push_back(v);
        snap["vars"] = std::move(vars);
        auto c = provider.query(t);
        snap["empty"] = !c.has_value();
        json allowed = json::array();
        if (c) {
            for (const auto& a : c->allowed_list()) allowed.push_back(a.to_tf());
        }
        snap["allowed"] = std::move(allowed);
        std::uint32_t bits = 0;
        for (int j = 0; j < t.arity(); ++j)
            if (planted.test(t[j])) bits |= 1U << j;
        const PartialAssignment restriction(bits, t.arity());
        snap["planted_restriction"] = restriction.to_tf();
        snap["breach"] = c.has_value() && !c->contains(restriction);
        snaps.push_back(std::move(snap));
    }
    out["tuples"] = std::move(snaps);
    out["breach_count"] = provider.breach_count();
    out["empty_count"] = provider.empty_count();
    write_output(out.dump(2) + "\n", opts.out);
    return kExitOk;
}

int cmd_recover(const CommonOpts& opts) {
    ExperimentConfig cfg = load_experiment_config(opts.config_path);
    if (opts.seed) cfg.base_seed = *opts.seed;
    const auto reports = run_trials(cfg, opts.jobs);

    const std::string out_path = !opts.out.empty() ? opts.out : cfg.output_path;
    const std::string content = render_trials(reports, parse_format(opts.format));
    write_output(content, out_path);

    std::size_t fails = 0;
    for (const auto& r : reports)
        if (!r.fail_events.empty()) ++fails;
    const double fail_rate = static_cast<double>(fails) / static_cast<double>(reports.size());
    if (fail_rate > opts.max_fail_rate) {
        std::cerr << "FAIL rate " << fail_rate << " exceeds --max-fail-rate "
                  << opts.max_fail_rate << "\n";
        return kExitFailRate;
    }
    return kExitOk;
}

int cmd_sweep(const CommonOpts& opts) {
    const json j = load_json(opts.config_path);
    if (!j.is_object() || !j.contains("template") || !j.contains("grid"))
        throw ConfigError("sweep config needs 'template' and 'grid'");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "template" && it.key() != "grid")
            throw ConfigError("sweep config: unknown key '" + it.key() + "'");

    ExperimentConfig tmpl = parse_experiment_config(j.at("template"));
    if (opts.seed) tmpl.base_seed = *opts.seed;
    const SweepGrid grid = parse_sweep_grid(j.at("grid"));

    const auto rows = run_sweep(tmpl, grid, opts.jobs);
    const std::string out_path = !opts.out.empty() ? opts.out : tmpl.output_path;
    write_output(render_report(rows, parse_format(opts.format)), out_path);

    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, r.fail_rate);
    if (worst > opts.max_fail_rate) {
        std::cerr << "worst point FAIL rate " << worst << " exceeds --max-fail-rate "
                  << opts.max_fail_rate << "\n";
        return kExitFailRate;
    }
    return kExitOk;
}

int cmd_oracle_check(const CommonOpts& opts) {
    ExperimentConfig cfg = load_experiment_config(opts.config_path);
    if (opts.seed) cfg.base_seed = *opts.seed;
    if (cfg.sim.n > 24) throw ConfigError("oracle-check requires n <= 24");

    std::size_t instances = 0, breached = 0, planted_missing = 0, tier_failures = 0,
                cluster_failures = 0, vc_successes = 0, empty_instances = 0;

    for (std::uint64_t i = 0; i < cfg.trials; ++i) {
        const std::uint64_t seed = trial_seed(cfg.base_seed, i);
        SimConfig sim = cfg.sim;
        sim.seed = seed;
        const Assignment planted = gen_planted(sim.n, seed);
        ConstraintProvider provider(sim, planted);
        ++instances;

        std::vector<ConstraintSet> constraints;
        try {
            constraints = materialize_constraints(provider, sim.n, sim.r0);
        } catch (const EmptyConstraintError&) {
            ++empty_instances;
            continue;
        }
        const SolutionSet solutions = enumerate_satisfying(constraints, sim.n);
        const bool breach_free = provider.breach_count() == 0;
        if (!breach_free) ++breached;
        if (breach_free && !solutions.contains(planted)) ++planted_missing;

        const double eps = cfg.recovery.epsilon;
        auto check_tier = [&](auto&& run) {
            VerifiedOracle oracle(planted, SeedChain(seed).with("check").value());
            const RecoveryOutcome out = run(oracle);
            if (hamming_error(out.assignment, planted) > eps) ++tier_failures;
        };
        if (sim.r0 == 2)
            check_tier([&](VerifiedOracle& o) { return recover_r2(provider, o, cfg.recovery); });
        if (sim.n <= cfg.recovery.basic_n_cap)
            check_tier([&](VerifiedOracle& o) { return recover_basic(provider, o, cfg.recovery); });
        check_tier([&](VerifiedOracle& o) {
            return recover_efficient(provider, o, cfg.recovery,
                                     SeedChain(seed).with("algorithm").value());
        });

        if (!solutions.empty()) {
            const std::size_t k_half = vc_sample_bound(sim.r0, eps, 0.5);
            if (k_half < 63 &&
                cluster_count(solutions, eps) > (std::size_t{1} << k_half))
                ++cluster_failures;
            VerifiedOracle vc_oracle(planted, SeedChain(seed).with("vc").value());
            const Assignment vc_out = vc_recover(
                solutions, vc_oracle, vc_sample_bound(sim.r0, eps, cfg.recovery.delta));
            if (hamming_error(vc_out, planted) <= eps) ++vc_successes;
        }
    }

    std::cout << "instances:          " << instances << "\n"
              << "empty-constraint:   " << empty_instances << "\n"
              << "breached:           " << breached << "\n"
              << "planted missing:    " << planted_missing << " (breach-free instances)\n"
              << "tier failures:      " << tier_failures << " (error > epsilon)\n"
              << "cluster bound viol: " << cluster_failures << "\n"
              << "vc successes:       " << vc_successes << "\n";

    const bool ok = planted_missing == 0 && tier_failures == 0 && cluster_failures == 0;
    std::cout << (ok ? "oracle-check: OK" : "oracle-check: FAILED") << "\n";
    return ok ? kExitOk : kExitFailRate;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-verified recovery of planted assignments from corrupted tuple reviews"};
    app.require_subcommand(1);

    CommonOpts sim_opts, rec_opts, sweep_opts, check_opts;
    std::string tuple_list_arg;

    CLI::App* simulate = app.add_subcommand("simulate", "emit a provider snapshot as JSON");
    add_common(simulate, sim_opts, false);
    simulate->add_option("--tuples", tuple_list_arg,
                         "tuples to inspect, e.g. \"0,1;2,5\" (default: first 10)");

    CLI::App* recover = app.add_subcommand("recover", "run trials of one configuration");
    add_common(recover, rec_opts);

    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid and aggregate");
    add_common(sweep, sweep_opts);

    CLI::App* check = app.add_subcommand("oracle-check",
                                         "exhaustive baseline battery on enumerable instances");
    add_common(check, check_opts, false);

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return cmd_simulate(sim_opts, tuple_list_arg);
        if (recover->parsed()) return cmd_recover(rec_opts);
        if (sweep->parsed()) return cmd_sweep(sweep_opts);
        if (check->parsed()) return cmd_oracle_check(check_opts);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
