#pragma once

#include "spca/core.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace spca {

enum class RhoMode { Optimal, Small, Manual };

const char* rho_mode_name(RhoMode mode);
RhoMode rho_mode_from_name(const std::string& name);

// ---------------------------------------------------------------------------
// Scalar threshold formulas
// ---------------------------------------------------------------------------

/// Delta = 4 log(9 e n / k*) + 4 log(1/delta).
double delta_level(int n, int k_star, double delta);

/// optimal: rho = Delta/m + Delta / sqrt(k* m (Delta + 4/e));
/// small:   rho = 1/n;  manual passes the supplied value through.
double rho_schedule(RhoMode mode, int n, int m, int k_star, double delta_level,
                    std::optional<double> manual = std::nullopt);

struct ThetaThresholds {
    double theta_phi = 0.0;
    /// Small-k* variant; empty when mu * Delta >= 1 (outside its regime).
    std::optional<double> theta_phi_small;
};

ThetaThresholds theta_thresholds(int n, int m, int k_star, double delta);

struct TauLevels {
    double tau0 = 0.0;
    double tau1 = 0.0;
};

/// Acceptance levels; tau1 - tau0 = (1 - 2 sqrt(log(1/delta)/m)) (theta - theta_phi).
TauLevels tau_levels(double theta, int n, int m, int k_star, double delta,
                     double delta_level);

struct BetaRatio {
    double beta = 0.0;  // theta(c)/c, in (0, 1]; 0 when vacuous
    double c = 0.0;
    bool vacuous = false;  // the guaranteed psi floor was nonpositive
};

/// Approximation-ratio floor beta(mu, kappa) at the optimal-phi rho schedule.
BetaRatio beta_ratio(double mu, double kappa, int m, double delta,
                     double delta_level);

struct HBounds {
    double h1_lower = 0.0;  // phi(rho) floor under H1 (theta = 0 gives the psi floor)
    /// phi(rho) ceiling under H0; empty when rho m / Delta <= 1.
    std::optional<double> h0_upper;
};

HBounds h_bounds(double theta, double rho, int k_star, int m, double delta,
                 double delta_level);

/// Threshold above which the plain lambda_max statistic separates the two
/// hypotheses in the proportional regime; kept for comparison only.
double lambda_max_detection_threshold(double mu);

// ---------------------------------------------------------------------------
// Detection plan
// ---------------------------------------------------------------------------

struct DetectionPlan {
    ModelConfig config;
    RhoMode rho_mode = RhoMode::Small;

    double delta_level = 0.0;  // Delta
    double rho = 0.0;
    double mu = 0.0;     // n/m
    double kappa = 0.0;  // k*/n

    double theta_phi = 0.0;
    std::optional<double> theta_phi_small;
    double tau0 = 0.0;
    double tau1 = 0.0;

    double beta = 0.0;
    bool beta_vacuous = false;
    double theta_psi = 0.0;              // beta^{-1} theta_phi; +inf when beta. = 0
    std::optional<double> tau_psi;       // midpoint of [beta^{-1} tau0, tau1]
    bool below_threshold = false;        // no usable tau_psi for this configuration

    double h1_lower = 0.0;
    std::optional<double> h0_upper;
};

/// Assembles every scalar threshold for one experiment configuration.  Never
/// throws on degenerate regimes; it flags them instead.
DetectionPlan make_plan(const ModelConfig& config, RhoMode rho_mode,
                        std::optional<double> manual_rho = std::nullopt);

/// Key/value serialization in full round-trip precision.
std::string plan_to_text(const DetectionPlan& plan);

/// 1{statistic_value > tau}, strict.
bool run_test(double statistic_value, double tau);

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct StatisticRecord {
    double psi = std::numeric_limits<double>::quiet_NaN();
    double lambda_max = std::numeric_limits<double>::quiet_NaN();
    double diag_max = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<std::string, double>> plugin;
    Hypothesis label = Hypothesis::Unknown;
    std::uint64_t seed = 0;
};

/// Externally supplied statistic (the MDP of the literature plugs in here).
using StatisticFn = std::function<double(const CovarianceMatrix&)>;

/// lambda_max(Sigma_hat) and max_i Sigma_hat_ii; psi and plugins left unset.
StatisticRecord baseline_stats(const CovarianceMatrix& sigma_hat);

} // namespace spca
