#include "spca/experiment.hpp"

#include "spca/bounds.hpp"
#include "spca/matrix_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace spca {

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Mann-Whitney AUC: P(h1 > h0) + P(h1 == h0)/2
double auc_of(std::vector<double> h0, std::vector<double> h1) {
    std::sort(h0.begin(), h0.end());
    double wins = 0.0;
    for (double x : h1) {
        const auto lo = std::lower_bound(h0.begin(), h0.end(), x);
        const auto hi = std::upper_bound(h0.begin(), h0.end(), x);
        wins += static_cast<double>(lo - h0.begin()) +
                0.5 * static_cast<double>(hi - lo);
    }
    return wins / (static_cast<double>(h0.size()) * static_cast<double>(h1.size()));
}

double statistic_of(const TrialRow& row, const std::string& name,
                    const std::vector<std::string>& names) {
    if (name == "psi") return row.psi;
    if (name == "lambda_max") return row.lambda_max;
    if (name == "diag_max") return row.diag_max;
    for (std::size_t i = 3; i < names.size(); ++i)
        if (names[i] == name) return row.plugin_values[i - 3];
    throw InputError("unknown statistic: " + name);
}

std::string provenance_header(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "# n = " << cfg.model.n << '\n'
        << "# m = " << cfg.model.m << '\n'
        << "# k_star = " << cfg.model.k_star << '\n'
        << "# theta = " << format_double(cfg.model.theta) << '\n'
        << "# delta = " << format_double(cfg.model.delta) << '\n'
        << "# trials = " << cfg.trials << '\n'
        << "# seed = " << cfg.model.seed << '\n'
        << "# rho_mode = " << rho_mode_name(cfg.rho_mode) << '\n'
        << "# tol = " << format_double(cfg.tol) << '\n'
        << "# max_iter = " << cfg.max_iter << '\n'
        << "# rng = " << CounterRng::version << '\n';
    return out.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot open file for writing: " + path.string());
    return out;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.model.validate();
    if (config.trials < 1)
        throw InputError("run_experiment: trials must be at least 1");
    const auto t_start = std::chrono::steady_clock::now();

    DetectionPlan plan = make_plan(config.model, config.rho_mode, config.manual_rho);
    const double rho = plan.rho;
    const double eps = config.epsilon.value_or(default_epsilon(config.tol));
    const SmoothingParams params = SmoothingParams::make(config.model.n, eps);

    const int total = 2 * config.trials;
    std::vector<TrialRow> rows(static_cast<std::size_t>(total));

    const auto run_one = [&](int slot) {
        const Hypothesis hyp = slot < config.trials ? Hypothesis::H0 : Hypothesis::H1;
        const int trial = slot % config.trials;
        ModelConfig mc = config.model;
        mc.seed = CounterRng(config.model.seed)
                      .derived(hyp == Hypothesis::H0 ? 0u : 1u)
                      .derived(static_cast<std::uint64_t>(trial))
                      .key();
        const SampleSet samples = sample_model(mc, hyp);
        const CovarianceMatrix sigma_hat = sample_covariance(samples);

        TrialRow row;
        row.trial = trial;
        row.hypothesis = hyp;
        row.seed = mc.seed;

        const StatisticRecord base = baseline_stats(sigma_hat);
        row.lambda_max = base.lambda_max;
        row.diag_max = base.diag_max;
        for (const auto& [name, fn] : config.plugins)
            row.plugin_values.push_back(fn(sigma_hat));

        const FactorMatrix root = factor_root(sigma_hat);
        const RelaxationResult res =
            solve_psi(root, rho, params, config.tol, config.max_iter);
        row.psi = res.psi_lower;
        row.psi_upper = res.psi_upper;
        row.gap = res.psi_upper - res.psi_lower;
        row.iterations = res.iterations;
        row.converged = res.converged;
        rows[static_cast<std::size_t>(slot)] = std::move(row);
    };

    unsigned workers = config.threads != 0 ? config.threads
                                           : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(total));
    if (workers <= 1) {
        for (int slot = 0; slot < total; ++slot) run_one(slot);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (unsigned wrk = 0; wrk < workers; ++wrk)
            pool.emplace_back([&] {
                for (int slot; (slot = next.fetch_add(1)) < total;)
                    run_one(slot);
            });
        for (auto& th : pool) th.join();
    }

    ExperimentReport report;
    report.config = config;
    report.plan = std::move(plan);
    report.rows = std::move(rows);
    report.statistic_names = {"psi", "lambda_max", "diag_max"};
    for (const auto& [name, fn] : config.plugins)
        report.statistic_names.push_back(name);
    report.summaries = summarize_rows(report.rows, report.statistic_names);

    if (report.plan.tau_psi) {
        int rej0 = 0, rej1 = 0;
        for (const TrialRow& row : report.rows) {
            const bool rej = run_test(row.psi, *report.plan.tau_psi);
            (row.hypothesis == Hypothesis::H0 ? rej0 : rej1) += rej ? 1 : 0;
        }
        report.reject_rate_h0 = static_cast<double>(rej0) / config.trials;
        report.reject_rate_h1 = static_cast<double>(rej1) / config.trials;
    }
    for (const TrialRow& row : report.rows)
        if (!row.converged) ++report.non_converged;

    const auto runtime_beta = [&](double mean_psi) {
        const double c = mean_psi / (config.model.n * rho);
        return c > 0.0 ? vartheta(c) / c : 0.0;
    };
    report.beta_runtime_h0 = runtime_beta(report.summaries.at("psi").mean_h0);
    report.beta_runtime_h1 = runtime_beta(report.summaries.at("psi").mean_h1);

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

std::map<std::string, StatSummary> summarize_rows(
    const std::vector<TrialRow>& rows, const std::vector<std::string>& names) {
    std::map<std::string, StatSummary> out;
    for (const std::string& name : names) {
        std::vector<double> h0, h1;
        for (const TrialRow& row : rows) {
            if (row.hypothesis == Hypothesis::H0)
                h0.push_back(statistic_of(row, name, names));
            else if (row.hypothesis == Hypothesis::H1)
                h1.push_back(statistic_of(row, name, names));
        }
        if (h0.empty() || h1.empty())
            throw InputError("summarize_rows: need rows under both hypotheses");
        StatSummary s;
        s.mean_h0 = mean_of(h0);
        s.mean_h1 = mean_of(h1);
        s.std_h0 = std_of(h0, s.mean_h0);
        s.std_h1 = std_of(h1, s.mean_h1);
        const double pooled_se =
            std::sqrt(s.std_h0 * s.std_h0 / static_cast<double>(h0.size()) +
                      s.std_h1 * s.std_h1 / static_cast<double>(h1.size()));
        s.separation = pooled_se > 0.0 ? (s.mean_h1 - s.mean_h0) / pooled_se : 0.0;
        s.auc = auc_of(std::move(h0), std::move(h1));
        out.emplace(name, s);
    }
    return out;
}

void write_experiment_files(const ExperimentReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string header = provenance_header(report.config);

    {
        std::ofstream out = open_out(fs::path(out_dir) / "trials.csv");
        out << header;
        out << "trial,hypothesis,psi,psi_upper,gap,iterations,converged,"
               "lambda_max,diag_max";
        for (std::size_t i = 3; i < report.statistic_names.size(); ++i)
            out << ',' << report.statistic_names[i];
        out << ",seed\n";
        for (const TrialRow& row : report.rows) {
            out << row.trial << ',' << hypothesis_name(row.hypothesis) << ','
                << format_double(row.psi) << ',' << format_double(row.psi_upper)
                << ',' << format_double(row.gap) << ',' << row.iterations << ','
                << (row.converged ? 1 : 0) << ',' << format_double(row.lambda_max)
                << ',' << format_double(row.diag_max);
            for (double v : row.plugin_values) out << ',' << format_double(v);
            out << ',' << row.seed << '\n';
        }
    }

    for (const std::string& name : report.statistic_names) {
        std::ofstream out = open_out(fs::path(out_dir) / ("stat_" + name + ".csv"));
        out << header;
        for (const TrialRow& row : report.rows)
            out << hypothesis_name(row.hypothesis) << ','
                << format_double(statistic_of(row, name, report.statistic_names))
                << '\n';
    }

    {
        std::ofstream out = open_out(fs::path(out_dir) / "plan.txt");
        out << header << plan_to_text(report.plan);
    }

    {
        std::ofstream out = open_out(fs::path(out_dir) / "summary.txt");
        out << header;
        for (const std::string& name : report.statistic_names) {
            const StatSummary& s = report.summaries.at(name);
            out << name << ".mean_h0 = " << format_double(s.mean_h0) << '\n'
                << name << ".std_h0 = " << format_double(s.std_h0) << '\n'
                << name << ".mean_h1 = " << format_double(s.mean_h1) << '\n'
                << name << ".std_h1 = " << format_double(s.std_h1) << '\n'
                << name << ".separation = " << format_double(s.separation) << '\n'
                << name << ".auc = " << format_double(s.auc) << '\n';
        }
        out << "tau_psi = "
            << (report.plan.tau_psi ? format_double(*report.plan.tau_psi)
                                    : std::string("none"))
            << '\n';
        if (report.reject_rate_h0)
            out << "reject_rate_h0 = " << format_double(*report.reject_rate_h0) << '\n'
                << "reject_rate_h1 = " << format_double(*report.reject_rate_h1) << '\n';
        out << "plan_beta = " << format_double(report.plan.beta) << '\n'
            << "beta_runtime_h0 = " << format_double(report.beta_runtime_h0) << '\n'
            << "beta_runtime_h1 = " << format_double(report.beta_runtime_h1) << '\n'
            << "non_converged = " << report.non_converged << '\n';
    }
}

} // namespace spca
