#pragma once

#include "spca/detect.hpp"
#include "spca/relax.hpp"

#include <map>
#include <string>
#include <vector>

namespace spca {

struct ExperimentConfig {
    ModelConfig model;                       // n, m, k*, theta, delta, seed
    int trials = 200;                        // per hypothesis
    RhoMode rho_mode = RhoMode::Small;
    std::optional<double> manual_rho;
    double tol = 0.1;                        // solver stopping gap
    int max_iter = 1000;
    std::optional<double> epsilon;           // default: min(0.05, tol/4)
    unsigned threads = 0;                    // 0 = hardware concurrency
    std::vector<std::pair<std::string, StatisticFn>> plugins;
};

struct TrialRow {
    int trial = 0;
    Hypothesis hypothesis = Hypothesis::Unknown;
    std::uint64_t seed = 0;
    double psi = 0.0;        // certified primal value (the test statistic)
    double psi_upper = 0.0;
    double gap = 0.0;        // certified interval width, kept for non-converged rows
    int iterations = 0;
    bool converged = false;
    double lambda_max = 0.0;
    double diag_max = 0.0;
    std::vector<double> plugin_values;
};

struct StatSummary {
    double mean_h0 = 0.0, std_h0 = 0.0;
    double mean_h1 = 0.0, std_h1 = 0.0;
    double separation = 0.0;  // (mean_h1 - mean_h0) / pooled standard error
    double auc = 0.0;         // P(stat_H1 > stat_H0), ties at 1/2
};

struct ExperimentReport {
    ExperimentConfig config;
    DetectionPlan plan;
    std::vector<TrialRow> rows;  // ordered: all H0 trials, then all H1 trials
    std::vector<std::string> statistic_names;  // psi, lambda_max, diag_max, plugins...
    std::map<std::string, StatSummary> summaries;
    std::optional<double> reject_rate_h0;  // share of psi > tau_psi, when defined
    std::optional<double> reject_rate_h1;
    /// Approximation-ratio floor theta(c)/c recomputed at the rho actually in
    /// use, with c the mean observed psi/(n rho); the plan's beta keeps the
    /// optimal-phi schedule baked in, so both are recorded.
    double beta_runtime_h0 = 0.0;
    double beta_runtime_h1 = 0.0;
    double wall_seconds = 0.0;
    int non_converged = 0;
};

/// Samples both hypotheses `trials` times, computes psi(rho), lambda_max and
/// diag-max (plus plugins) per draw, and summarizes separation.  Trials run in
/// parallel on derived RNG streams; output is a pure function of the config.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Recompute per-statistic summaries from rows (used to cross-check files).
std::map<std::string, StatSummary> summarize_rows(
    const std::vector<TrialRow>& rows, const std::vector<std::string>& names);

/// Writes trials.csv, one stat_<name>.csv per statistic, plan.txt and
/// summary.txt under out_dir.  Every file carries the full configuration and
/// seed; contents are deterministic for a fixed config.
void write_experiment_files(const ExperimentReport& report, const std::string& out_dir);

} // namespace spca
