#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "planted/recovery.hpp"
#include "planted/sim.hpp"

namespace planted {

enum class Algorithm { R2, Basic, Efficient, Vc, Majority };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct ExperimentConfig {
    SimConfig sim;
    RecoveryConfig recovery;
    Algorithm algorithm = Algorithm::Efficient;
    std::uint64_t trials = 1;
    std::uint64_t base_seed = 0;
    std::string output_path;

    // Validates field ranges and algorithm-specific preconditions (r0
    // agreement, r2 arity, basic/vc size caps).
    void validate() const;
    nlohmann::json to_json() const;
};

// Strict parser: unknown keys anywhere are a hard error.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

struct TrialReport {
    std::uint64_t trial_index = 0;
    std::uint64_t seed = 0;
    double error_fraction = 0.0;
    std::uint64_t verified_used = 0;
    int phases = 0;
    int max_ascend_depth = 0;
    std::vector<FailEvent> fail_events;
    bool aborted = false;
    std::uint64_t soundness_breaches = 0;
    std::uint64_t empty_constraints = 0;
    double wall_time_ms = 0.0;
    nlohmann::json config_echo;

    nlohmann::json to_json() const;
};

// Seed for one trial's streams: mix(base_seed, trial_index). Planted data,
// reviews, the oracle, and the algorithm's sampling each derive their own
// substream from it by label.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index);

// Builds planted/provider/oracle from the trial seed, runs the configured
// algorithm, and measures the result. Deterministic per (cfg, trial_index)
// apart from wall_time_ms.
TrialReport run_trial(const ExperimentConfig& cfg, std::uint64_t trial_index);

// All trials of one configuration, optionally across threads. Reports come
// back in trial order regardless of scheduling.
std::vector<TrialReport> run_trials(const ExperimentConfig& cfg, int jobs = 1);

// One aggregated sweep row. Fields mirror the report columns exactly.
struct SweepRow {
    std::string algorithm;
    std::size_t n = 0;
    int r0 = 0;
    double alpha = 0.0;
    double p = 0.0;
    std::uint64_t m_per_tuple = 0;
    std::string adversary;
    double epsilon = 0.0;
    double delta = 0.0;
    std::uint64_t trials = 0;
    double success_rate = 0.0;
    double median_error = 0.0;
    double mean_error = 0.0;
    double median_verified_used = 0.0;
    double median_wall_ms = 0.0;
    double fail_rate = 0.0;
    double breach_rate = 0.0;
};

SweepRow aggregate(const ExperimentConfig& cfg, const std::vector<TrialReport>& reports);

// Cartesian sweep grid over a subset of the simulation knobs. Point order:
// rightmost listed dimension varies fastest, in the fixed dimension order
// n, alpha, p, epsilon, m_per_tuple, adversary.
struct SweepGrid {
    std::vector<std::size_t> n;
    std::vector<double> alpha;
    std::vector<double> p;
    std::vector<double> epsilon;
    std::vector<std::uint64_t> m_per_tuple;
    std::vector<std::string> adversary;

    bool empty() const;
    std::size_t point_count() const;
};

SweepGrid parse_sweep_grid(const nlohmann::json& j);

// Configs for every grid point, template fields overridden per dimension.
std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& tmpl, const SweepGrid& grid);

std::vector<SweepRow> run_sweep(const ExperimentConfig& tmpl, const SweepGrid& grid,
                                int jobs = 1);

enum class ReportFormat { Csv, Json };
ReportFormat parse_format(const std::string& s);

// Atomic write (temp file + rename). CSV headers and JSON keys match the
// SweepRow fields, in order.
void emit_report(const std::vector<SweepRow>& rows, ReportFormat format,
                 const std::string& path);
std::string render_report(const std::vector<SweepRow>& rows, ReportFormat format);
std::vector<SweepRow> parse_report_csv(const std::string& text);

// Per-trial emitter used by the `recover` subcommand.
void emit_trials(const std::vector<TrialReport>& reports, ReportFormat format,
                 const std::string& path);
std::string render_trials(const std::vector<TrialReport>& reports, ReportFormat format);

}  // namespace planted
