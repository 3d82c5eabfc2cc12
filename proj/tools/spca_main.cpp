// spca: sparse-PCA relaxation solver, approximation certificates, and the
// spiked-covariance detection experiment.

#include "spca/bounds.hpp"
#include "spca/core.hpp"
#include "spca/detect.hpp"
#include "spca/experiment.hpp"
#include "spca/matrix_io.hpp"
#include "spca/oracle.hpp"
#include "spca/relax.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

using namespace spca;

std::string default_out_dir() {
    if (const char* env = std::getenv("SPCA_OUT_DIR"))
        return env;
    return "spca_out";
}

struct SolveOptions {
    std::string matrix_file;
    double rho = 0.0;
    double epsilon = 0.0;  // 0 = derive from tol
    double tol = 1e-3;
    int max_iter = 2000;
};

struct SolveOutcome {
    RelaxationResult result;
    FactorMatrix root;
    std::vector<int> kept;
    int original_dim;
};

SolveOutcome solve_from_file(const SolveOptions& opt) {
    const Eigen::MatrixXd raw = read_matrix_csv_file(opt.matrix_file);
    const CovarianceMatrix sigma = CovarianceMatrix::from_matrix(raw);
    EliminationResult elim = preprocess_eliminate(sigma, opt.rho);
    if (!elim.sigma)
        throw EmptyProblemError("every variable has Sigma_ii < rho; nothing to solve");
    const CovarianceMatrix& reduced = *elim.sigma;
    FactorMatrix root = factor_root(reduced);

    if (reduced.dim() == 1) {
        // one surviving variable: psi(rho) = Sigma_11 - rho in closed form
        const double value = reduced.entries()(0, 0) - opt.rho;
        Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
        RelaxationResult res{value,
                             value,
                             DensityMatrix::from_matrix(one),
                             DualAggregate{value * one},
                             1,
                             0,
                             true,
                             {}};
        return SolveOutcome{std::move(res), std::move(root), std::move(elim.kept),
                            sigma.dim()};
    }

    const double eps = opt.epsilon > 0.0 ? opt.epsilon : default_epsilon(opt.tol);
    const SmoothingParams params = SmoothingParams::make(reduced.dim(), eps);
    RelaxationResult res = solve_psi(root, opt.rho, params, opt.tol, opt.max_iter);
    return SolveOutcome{std::move(res), std::move(root), std::move(elim.kept),
                        sigma.dim()};
}

void print_interval(const SolveOutcome& out, double rho) {
    const RelaxationResult& r = out.result;
    std::cout << "rho = " << format_double(rho) << '\n'
              << "psi_lower = " << format_double(r.psi_lower) << '\n'
              << "psi_upper = " << format_double(r.psi_upper) << '\n'
              << "gap = " << format_double(r.psi_upper - r.psi_lower) << '\n'
              << "rank = " << r.rank << '\n'
              << "iterations = " << r.iterations << '\n'
              << "converged = " << (r.converged ? "true" : "false") << '\n'
              << "kept_variables = " << out.kept.size() << " of " << out.original_dim
              << '\n';
}

int cmd_psi(const SolveOptions& opt, const std::string& trace_out) {
    SolveOutcome out = solve_from_file(opt);
    print_interval(out, opt.rho);
    if (!trace_out.empty()) {
        std::ofstream tf(trace_out);
        if (!tf)
            throw InputError("cannot open trace file: " + trace_out);
        write_trace_csv(tf, out.result);
    }
    return 0;
}

int cmd_bounds(const SolveOptions& opt, std::int64_t mc_samples, int round_trials,
               std::uint64_t seed) {
    SolveOutcome out = solve_from_file(opt);
    const int n = out.root.dim();

    RatioFunctions cfg;
    cfg.mc_samples = mc_samples;
    cfg.seed = seed;
    SandwichCertificate cert =
        sandwich(std::max(out.result.psi_lower, 0.0), n, opt.rho, out.result.rank,
                 cfg, out.result.psi_upper);
    const SparseSolution rounded = randomized_round(
        out.result.x_final, out.root, opt.rho, round_trials,
        CounterRng(seed).derived(0xB0).key());
    cert.rounded_value = rounded.value;

    print_interval(out, opt.rho);
    std::cout << "sandwich_lower = " << format_double(cert.lower) << '\n'
              << "sandwich_lower_std_error = " << format_double(cert.lower_std_error)
              << '\n'
              << "relaxation = " << format_double(cert.relaxation) << '\n'
              << "rounded_value = " << format_double(rounded.value) << '\n';
    std::cout << "rounded_support =";
    for (int i : rounded.support) std::cout << ' ' << (i + 1);
    std::cout << "\nrounded_cardinality = " << rounded.cardinality << '\n';
    return 0;
}

int cmd_plan(int n, int m, int k, double theta, double delta,
             const std::string& mode, double manual_rho) {
    ModelConfig config;
    config.n = n;
    config.m = m;
    config.k_star = k;
    config.theta = theta;
    config.delta = delta;
    const RhoMode rm = rho_mode_from_name(mode);
    std::optional<double> manual;
    if (rm == RhoMode::Manual) manual = manual_rho;
    std::cout << plan_to_text(make_plan(config, rm, manual));
    return 0;
}

int cmd_experiment(const ExperimentConfig& config, const std::string& out_dir) {
    ExperimentReport report = run_experiment(config);
    write_experiment_files(report, out_dir);
    std::cout << "out_dir = " << out_dir << '\n';
    for (const std::string& name : report.statistic_names) {
        const StatSummary& s = report.summaries.at(name);
        std::cout << name << ": mean_h0 = " << format_double(s.mean_h0)
                  << ", mean_h1 = " << format_double(s.mean_h1)
                  << ", auc = " << format_double(s.auc)
                  << ", separation = " << format_double(s.separation) << '\n';
    }
    if (report.reject_rate_h0)
        std::cout << "reject_rate_h0 = " << format_double(*report.reject_rate_h0)
                  << ", reject_rate_h1 = " << format_double(*report.reject_rate_h1)
                  << '\n';
    std::cout << "non_converged = " << report.non_converged << '\n'
              << "wall_seconds = " << format_double(report.wall_seconds) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse-PCA semidefinite relaxation: solver, bounds, detection"};
    app.require_subcommand(1);

    // psi
    SolveOptions psi_opt;
    std::string trace_out;
    CLI::App* psi = app.add_subcommand("psi", "certified interval for psi(rho)");
    psi->add_option("matrix-file", psi_opt.matrix_file, "covariance CSV")->required();
    psi->add_option("--rho", psi_opt.rho, "cardinality price")->required();
    psi->add_option("--epsilon", psi_opt.epsilon, "smoothing level (0 = auto)");
    psi->add_option("--tol", psi_opt.tol, "certified gap target");
    psi->add_option("--max-iter", psi_opt.max_iter, "iteration cap");
    psi->add_option("--trace-out", trace_out, "per-iteration CSV trace");

    // bounds
    SolveOptions bounds_opt;
    std::int64_t mc_samples = 1'000'000;
    int round_trials = 1000;
    std::uint64_t bounds_seed = 0;
    CLI::App* bounds = app.add_subcommand("bounds", "sandwich certificate and rounding");
    bounds->add_option("matrix-file", bounds_opt.matrix_file, "covariance CSV")->required();
    bounds->add_option("--rho", bounds_opt.rho, "cardinality price")->required();
    bounds->add_option("--mc-samples", mc_samples, "Monte Carlo sample count");
    bounds->add_option("--round-trials", round_trials, "rounding trials");
    bounds->add_option("--seed", bounds_seed, "RNG seed");
    bounds->add_option("--epsilon", bounds_opt.epsilon, "smoothing level (0 = auto)");
    bounds->add_option("--tol", bounds_opt.tol, "certified gap target");
    bounds->add_option("--max-iter", bounds_opt.max_iter, "iteration cap");

    // plan
    int pn = 100, pm = 50, pk = 20;
    double ptheta = 3.0, pdelta = 0.01, pmanual = 0.0;
    std::string pmode = "small";
    CLI::App* plan = app.add_subcommand("plan", "detection thresholds for one configuration");
    plan->add_option("--n", pn, "ambient dimension");
    plan->add_option("--m", pm, "sample count");
    plan->add_option("--k", pk, "spike cardinality");
    plan->add_option("--theta", ptheta, "spike strength");
    plan->add_option("--delta", pdelta, "confidence parameter");
    plan->add_option("--rho-mode", pmode, "optimal | small | manual");
    plan->add_option("--rho", pmanual, "manual rho value");

    // experiment
    ExperimentConfig exp_cfg;
    exp_cfg.model.n = 100;
    exp_cfg.model.m = 50;
    exp_cfg.model.k_star = 20;
    exp_cfg.model.theta = 3.0;
    exp_cfg.model.delta = 0.01;
    exp_cfg.model.seed = 20240101;
    std::string exp_mode = "small";
    double exp_manual = 0.0, exp_eps = 0.0;
    std::string out_dir = default_out_dir();
    CLI::App* exp = app.add_subcommand("experiment", "seeded two-hypothesis Monte Carlo run");
    exp->add_option("--n", exp_cfg.model.n, "ambient dimension");
    exp->add_option("--m", exp_cfg.model.m, "sample count");
    exp->add_option("--k", exp_cfg.model.k_star, "spike cardinality");
    exp->add_option("--theta", exp_cfg.model.theta, "spike strength");
    exp->add_option("--delta", exp_cfg.model.delta, "confidence parameter");
    exp->add_option("--trials", exp_cfg.trials, "trials per hypothesis");
    exp->add_option("--seed", exp_cfg.model.seed, "master seed");
    exp->add_option("--rho-mode", exp_mode, "optimal | small | manual");
    exp->add_option("--rho", exp_manual, "manual rho value");
    exp->add_option("--tol", exp_cfg.tol, "solver gap target");
    exp->add_option("--max-iter", exp_cfg.max_iter, "solver iteration cap");
    exp->add_option("--epsilon", exp_eps, "smoothing level (0 = auto)");
    exp->add_option("--threads", exp_cfg.threads, "worker threads (0 = all)");
    exp->add_option("--out-dir", out_dir, "output directory (env SPCA_OUT_DIR)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (psi->parsed())
            return cmd_psi(psi_opt, trace_out);
        if (bounds->parsed())
            return cmd_bounds(bounds_opt, mc_samples, round_trials, bounds_seed);
        if (plan->parsed())
            return cmd_plan(pn, pm, pk, ptheta, pdelta, pmode, pmanual);
        if (exp->parsed()) {
            exp_cfg.rho_mode = rho_mode_from_name(exp_mode);
            if (exp_cfg.rho_mode == RhoMode::Manual) exp_cfg.manual_rho = exp_manual;
            if (exp_eps > 0.0) exp_cfg.epsilon = exp_eps;
            return cmd_experiment(exp_cfg, out_dir);
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitInput;
}
