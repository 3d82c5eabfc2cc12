#pragma once

#include "spca/core.hpp"
#include "spca/oracle.hpp"
#include "spca/relax.hpp"

#include <cstdint>
#include <optional>

namespace spca {

/// Monte Carlo configuration for the approximation-ratio curves.
struct RatioFunctions {
    std::int64_t mc_samples = 1'000'000;  // at least 1e4
    std::uint64_t seed = 0;
};

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// theta(x) = E (x xi^2 - 1)_+ for xi ~ N(0,1), in closed form:
/// sqrt(2x/pi) e^{-1/(2x)} + 2(x-1) N(-x^{-1/2}); theta(0) = 0 by continuity.
double vartheta(double x);

/// Monte Carlo estimate of theta_r(x) = E (x xi_1^2 - (1/(r-1)) sum_{j=2}^r
/// xi_j^2)_+, bit-reproducible per seed, with its standard error.
McEstimate vartheta_r(double x, int r, const RatioFunctions& cfg);

/// Both sides of n rho theta_r(psi / (n rho)) <= phi(rho) <= psi(rho).
struct SandwichCertificate {
    double lower = 0.0;            // n rho theta_r(psi/(n rho))
    double lower_std_error = 0.0;  // Monte Carlo error of `lower`
    double relaxation = 0.0;       // psi estimate bounding phi from above
    double rho = 0.0;
    int r = 0;
    std::optional<double> rounded_value;  // best rounded lambda_max(Sigma_S) - rho|S|
};

/// psi_estimate should be a certified lower estimate of psi(rho) (any feasible
/// primal value qualifies); relaxation_upper, when given, records the dual
/// upper estimate instead of psi_estimate itself.
SandwichCertificate sandwich(double psi_estimate, int n, double rho, int r,
                             const RatioFunctions& cfg,
                             std::optional<double> relaxation_upper = std::nullopt);

/// (Tr Sigma - rho) / (n^2 rho): the X = I/n plug-in floor on psi(rho)/(n rho).
double naive_ratio_floor(const CovarianceMatrix& sigma, double rho);

/// Gaussian rounding of a feasible X: per trial draw xi ~ N(0, I), select
/// i with xi^T X^{1/2} B_i X^{1/2} xi > 0, score the selected support by
/// lambda_max(Sigma_S) - rho |S|, and keep the best trial.  The result is a
/// feasible point, so its value is always a valid lower bound on phi(rho).
/// If every trial selects the empty set, falls back to the best singleton.
SparseSolution randomized_round(const DensityMatrix& x, const FactorMatrix& a,
                                double rho, int trials, std::uint64_t seed);

} // namespace spca
