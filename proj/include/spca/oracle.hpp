#pragma once

#include "spca/core.hpp"

#include <cstdint>
#include <vector>

namespace spca {

/// Exhaustive enumeration refuses to visit more subsets than this.
inline constexpr std::int64_t kEnumerationCap = 2'000'000;

/// A feasible point of the combinatorial problem: unit vector supported on a
/// small index set, together with its objective value.
struct SparseSolution {
    double value = 0.0;
    std::vector<int> support;   // ascending original indices
    Eigen::VectorXd vector;     // unit norm, zero off the support
    int cardinality = 0;
};

/// max x^T Sigma x over unit vectors with Card(x) <= k, by enumerating all
/// size-k supports (monotonicity in k makes that sufficient).  Ties broken
/// toward the lexicographically smallest support.
SparseSolution sparse_lambda_max_exact(const CovarianceMatrix& sigma, int k);

/// min x^T Sigma x over unit vectors with Card(x) <= k, computed through the
/// identity with the complement problem on lambda_max(Sigma) I - Sigma and
/// cross-checked against direct enumeration.
SparseSolution sparse_lambda_min_exact(const CovarianceMatrix& sigma, int k);

/// max over nonempty supports S of lambda_max(Sigma_S) - rho |S|; equals the
/// penalized objective max_{||x||=1} x^T Sigma x - rho Card(x).
SparseSolution phi_exact(const CovarianceMatrix& sigma, double rho);

/// C(n, k) clamped to kEnumerationCap + 1 to avoid overflow.
std::int64_t subset_count(int n, int k);

} // namespace spca
