#include "spca/detect.hpp"

#include "spca/bounds.hpp"
#include "spca/matrix_io.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace spca {

namespace {

constexpr double kE = std::numbers::e;

double log_inv(double delta) { return std::log(1.0 / delta); }

void check_common(int n, int m, int k_star, double delta) {
    if (n < 1 || m < 1)
        throw InputError("detect: n and m must be positive");
    if (k_star < 1 || k_star > n)
        throw InputError("detect: k_star must lie in [1, n]");
    if (!(delta > 0.0 && delta <= 1.0))
        throw InputError("detect: delta must lie in (0, 1]");
}

std::string opt_text(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("none");
}

} // namespace

const char* rho_mode_name(RhoMode mode) {
    switch (mode) {
        case RhoMode::Optimal: return "optimal";
        case RhoMode::Small: return "small";
        default: return "manual";
    }
}

RhoMode rho_mode_from_name(const std::string& name) {
    if (name == "optimal") return RhoMode::Optimal;
    if (name == "small") return RhoMode::Small;
    if (name == "manual") return RhoMode::Manual;
    throw InputError("unknown rho mode: " + name);
}

double delta_level(int n, int k_star, double delta) {
    check_common(n, 1, k_star, delta);
    return 4.0 * std::log(9.0 * kE * n / k_star) + 4.0 * log_inv(delta);
}

double rho_schedule(RhoMode mode, int n, int m, int k_star, double delta_level,
                    std::optional<double> manual) {
    double rho;
    switch (mode) {
        case RhoMode::Optimal:
            check_common(n, m, k_star, 0.5);
            if (!(delta_level > 0.0))
                throw InputError("rho_schedule: delta_level must be positive");
            rho = delta_level / m +
                  delta_level / std::sqrt(k_star * static_cast<double>(m) *
                                          (delta_level + 4.0 / kE));
            break;
        case RhoMode::Small:
            if (n < 1) throw InputError("rho_schedule: n must be positive");
            rho = 1.0 / n;
            break;
        case RhoMode::Manual:
        default:
            if (!manual)
                throw InputError("rho_schedule: manual mode needs a value");
            rho = *manual;
            break;
    }
    if (!(rho > 0.0))
        throw InputError("rho_schedule: rho must be positive");
    return rho;
}

ThetaThresholds theta_thresholds(int n, int m, int k_star, double delta) {
    check_common(n, m, k_star, delta);
    const double dl = delta_level(n, k_star, delta);
    const double s = std::sqrt(log_inv(delta) / m);
    const double den = 1.0 - 2.0 * s;
    if (!(den > 0.0))
        throw InputError("theta_thresholds: 2 sqrt(log(1/delta)/m) must be below 1");

    const double q = k_star * (dl + 4.0 / kE) / m;
    ThetaThresholds out;
    out.theta_phi = (2.0 * std::sqrt(q) + q + 2.0 * s) / den;

    const double mu = static_cast<double>(n) / m;
    const double kappa = static_cast<double>(k_star) / n;
    if (mu * dl < 1.0) {
        out.theta_phi_small =
            ((1.0 + 4.0 / (kE * dl)) * kappa + mu * dl / (1.0 - mu * dl) + 2.0 * s) /
            den;
    }
    return out;
}

TauLevels tau_levels(double theta, int n, int m, int k_star, double delta,
                     double delta_level) {
    check_common(n, m, k_star, delta);
    if (!(delta_level > 0.0))
        throw InputError("tau_levels: delta_level must be positive");
    const double dl = delta_level;
    const double s = std::sqrt(log_inv(delta) / m);
    const double shared_root = std::sqrt(k_star * dl / (m * (1.0 + 4.0 / (kE * dl))));

    TauLevels out;
    out.tau0 = 1.0 + std::sqrt(k_star * (dl + 4.0 / kE) / m) +
               4.0 * k_star / (kE * m) + (4.0 / (kE * dl)) * shared_root;
    out.tau1 = 1.0 + theta - shared_root - k_star * dl / static_cast<double>(m) -
               2.0 * (1.0 + theta) * s;
    return out;
}

BetaRatio beta_ratio(double mu, double kappa, int m, double delta,
                     double delta_level) {
    if (!(mu > 0.0))
        throw InputError("beta_ratio: mu must be positive");
    if (!(kappa > 0.0 && kappa < 1.0))
        throw InputError("beta_ratio: kappa must lie in (0, 1)");
    if (m < 1 || !(delta > 0.0 && delta <= 1.0))
        throw InputError("beta_ratio: bad m or delta");
    const double dl = delta_level;
    if (!(dl > 0.0))
        throw InputError("beta_ratio: delta_level must be positive");

    const double numerator = 1.0 - mu * dl * kappa -
                             std::sqrt(mu * kappa) / std::sqrt(dl + 4.0 / kE) -
                             2.0 * std::sqrt(log_inv(delta) / m);
    BetaRatio out;
    if (!(numerator > 0.0)) {
        out.vacuous = true;
        return out;
    }
    const double denominator = mu * dl + mu * dl / std::sqrt(kappa * (dl + 4.0 / kE));
    out.c = numerator / denominator;
    out.beta = vartheta(out.c) / out.c;
    return out;
}

HBounds h_bounds(double theta, double rho, int k_star, int m, double delta,
                 double delta_level) {
    if (theta < 0.0)
        throw InputError("h_bounds: theta must be nonnegative");
    if (!(rho > 0.0) || k_star < 1 || m < 1)
        throw InputError("h_bounds: bad rho, k_star or m");
    if (!(delta > 0.0 && delta <= 1.0) || !(delta_level > 0.0))
        throw InputError("h_bounds: bad delta or delta_level");

    HBounds out;
    const double s = std::sqrt(log_inv(delta) / m);
    out.h1_lower = 1.0 + theta - rho * k_star - 2.0 * (1.0 + theta) * s;
    const double ratio = rho * m / delta_level;
    if (ratio > 1.0)
        out.h0_upper = 1.0 + 4.0 * k_star * rho / (kE * delta_level) + 1.0 / (ratio - 1.0);
    return out;
}

double lambda_max_detection_threshold(double mu) {
    if (!(mu > 0.0))
        throw InputError("lambda_max_detection_threshold: mu must be positive");
    return std::sqrt(mu) + mu;
}

DetectionPlan make_plan(const ModelConfig& config, RhoMode rho_mode,
                        std::optional<double> manual_rho) {
    config.validate();

    DetectionPlan plan;
    plan.config = config;
    plan.rho_mode = rho_mode;
    plan.delta_level = delta_level(config.n, config.k_star, config.delta);
    plan.rho = rho_schedule(rho_mode, config.n, config.m, config.k_star,
                            plan.delta_level, manual_rho);
    plan.mu = static_cast<double>(config.n) / config.m;
    plan.kappa = static_cast<double>(config.k_star) / config.n;

    const ThetaThresholds th =
        theta_thresholds(config.n, config.m, config.k_star, config.delta);
    plan.theta_phi = th.theta_phi;
    plan.theta_phi_small = th.theta_phi_small;

    const TauLevels tau = tau_levels(config.theta, config.n, config.m,
                                     config.k_star, config.delta, plan.delta_level);
    plan.tau0 = tau.tau0;
    plan.tau1 = tau.tau1;
    if (config.theta > plan.theta_phi && !(plan.tau0 <= plan.tau1 + 1e-9))
        throw NumericalError("make_plan: tau0 <= tau1 must hold above theta_phi");

    const BetaRatio br = beta_ratio(plan.mu, plan.kappa, config.m, config.delta,
                                    plan.delta_level);
    plan.beta = br.beta;
    plan.beta_vacuous = br.vacuous;
    plan.theta_psi = br.vacuous ? std::numeric_limits<double>::infinity()
                                : plan.theta_phi / plan.beta;

    if (!br.vacuous) {
        const double lo = plan.tau0 / plan.beta;
        if (lo <= plan.tau1)
            plan.tau_psi = 0.5 * (lo + plan.tau1);
    }
    plan.below_threshold = !plan.tau_psi.has_value();

    const HBounds hb = h_bounds(config.theta, plan.rho, config.k_star, config.m,
                                config.delta, plan.delta_level);
    plan.h1_lower = hb.h1_lower;
    plan.h0_upper = hb.h0_upper;
    return plan;
}

std::string plan_to_text(const DetectionPlan& plan) {
    std::ostringstream out;
    out << "n = " << plan.config.n << '\n'
        << "m = " << plan.config.m << '\n'
        << "k_star = " << plan.config.k_star << '\n'
        << "theta = " << format_double(plan.config.theta) << '\n'
        << "delta = " << format_double(plan.config.delta) << '\n'
        << "seed = " << plan.config.seed << '\n'
        << "rho_mode = " << rho_mode_name(plan.rho_mode) << '\n'
        << "delta_level = " << format_double(plan.delta_level) << '\n'
        << "rho = " << format_double(plan.rho) << '\n'
        << "mu = " << format_double(plan.mu) << '\n'
        << "kappa = " << format_double(plan.kappa) << '\n'
        << "theta_phi = " << format_double(plan.theta_phi) << '\n'
        << "theta_phi_small = " << opt_text(plan.theta_phi_small) << '\n'
        << "tau0 = " << format_double(plan.tau0) << '\n'
        << "tau1 = " << format_double(plan.tau1) << '\n'
        << "beta = " << format_double(plan.beta) << '\n'
        << "beta_vacuous = " << (plan.beta_vacuous ? "true" : "false") << '\n'
        << "theta_psi = " << format_double(plan.theta_psi) << '\n'
        << "tau_psi = " << opt_text(plan.tau_psi) << '\n'
        << "below_threshold = " << (plan.below_threshold ? "true" : "false") << '\n'
        << "h1_lower = " << format_double(plan.h1_lower) << '\n'
        << "h0_upper = " << opt_text(plan.h0_upper) << '\n';
    return out.str();
}

bool run_test(double statistic_value, double tau) {
    if (!std::isfinite(statistic_value) || !std::isfinite(tau))
        throw InputError("run_test: inputs must be finite");
    return statistic_value > tau;
}

StatisticRecord baseline_stats(const CovarianceMatrix& sigma_hat) {
    StatisticRecord rec;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_hat.entries(),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("baseline_stats: eigendecomposition failed");
    rec.lambda_max = es.eigenvalues().maxCoeff();
    rec.diag_max = sigma_hat.entries().diagonal().maxCoeff();
    return rec;
}

} // namespace spca
