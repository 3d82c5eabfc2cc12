#pragma once

#include "spca/errors.hpp"
#include "spca/rng.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

namespace spca {

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition, eigenvalues in descending order.
// ---------------------------------------------------------------------------

struct SymEig {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // column j pairs with values(j)
};

/// S = V diag(values) V^T with residual ||SV - V diag|| <= 1e-8 ||S||.
/// Throws NumericalError on non-finite input.
SymEig sym_eig(const Eigen::MatrixXd& s);

/// Standard normal CDF, absolute error well below 1e-12.
double gaussian_cdf(double t);

// ---------------------------------------------------------------------------
// Covariance container
// ---------------------------------------------------------------------------

struct OrderedCovariance;

/// Symmetric positive semidefinite matrix.  Construction symmetrizes exactly
/// (rejecting anything asymmetric beyond rounding) and rejects matrices with
/// an eigenvalue below -1e-8 * ||Sigma||_2.
class CovarianceMatrix {
public:
    static CovarianceMatrix from_matrix(Eigen::MatrixXd sigma);

    /// Canonical decreasing-diagonal reordering; the permutation is retained.
    static OrderedCovariance from_matrix_ordered(Eigen::MatrixXd sigma);

    int dim() const { return static_cast<int>(sigma_.rows()); }
    const Eigen::MatrixXd& entries() const { return sigma_; }
    double diagonal_min() const { return sigma_.diagonal().minCoeff(); }
    double trace() const { return sigma_.trace(); }

private:
    explicit CovarianceMatrix(Eigen::MatrixXd sigma) : sigma_(std::move(sigma)) {}
    Eigen::MatrixXd sigma_;
};

struct OrderedCovariance {
    CovarianceMatrix sigma;
    std::vector<int> permutation;  // reordered index i came from permutation[i]
};

/// Square root A of Sigma with Sigma = A^T A; columns a_i drive the
/// per-variable subproblems.  Any root is accepted as long as it reproduces
/// Sigma to 1e-8 relative Frobenius error.
class FactorMatrix {
public:
    static FactorMatrix from_root(Eigen::MatrixXd a, const CovarianceMatrix& sigma);

    int dim() const { return static_cast<int>(a_.rows()); }
    const Eigen::MatrixXd& matrix() const { return a_; }
    Eigen::VectorXd column(int i) const { return a_.col(i); }
    /// Squared column norms; equal to the diagonal of Sigma.
    const Eigen::VectorXd& column_norms2() const { return norms2_; }
    /// A^T A, recomputed from the stored root.
    Eigen::MatrixXd gram() const;

private:
    FactorMatrix(Eigen::MatrixXd a, Eigen::VectorXd norms2)
        : a_(std::move(a)), norms2_(std::move(norms2)) {}
    Eigen::MatrixXd a_;
    Eigen::VectorXd norms2_;
};

/// Symmetric PSD square root Sigma^{1/2}.  Eigenvalues in
/// [-1e-8 ||Sigma||_2, 0) are clamped to zero; anything lower throws.
FactorMatrix factor_root(const CovarianceMatrix& sigma);

// ---------------------------------------------------------------------------
// Gaussian spiked model
// ---------------------------------------------------------------------------

enum class Hypothesis { H0, H1, Unknown };

const char* hypothesis_name(Hypothesis h);

struct ModelConfig {
    int n = 0;
    int m = 0;
    int k_star = 0;
    double theta = 0.0;
    double delta = 0.01;               // confidence parameter, in (0, 1/2]
    std::uint64_t seed = 0;
    std::optional<Eigen::VectorXd> spike_vector;  // unit norm, Card <= k_star

    void validate() const;
    /// v_i = 1/sqrt(k*) on the k* leading coordinates, zero elsewhere.
    Eigen::VectorXd effective_spike() const;
};

struct SampleSet {
    int m = 0;
    Eigen::MatrixXd points;  // n x m, column j is sample x_j
    Hypothesis label = Hypothesis::Unknown;
};

/// m independent draws from N(0, I) under H0 or N(0, I + theta v v^T) under
/// H1; a pure function of (config, hypothesis, seed).  The underlying normal
/// stream does not depend on the hypothesis, so theta = 0 reproduces H0
/// draws bit-exactly.
SampleSet sample_model(const ModelConfig& config, Hypothesis hypothesis);

/// Sigma_hat = (1/m) sum_j x_j x_j^T.
CovarianceMatrix sample_covariance(const SampleSet& samples);

// ---------------------------------------------------------------------------
// Variable elimination
// ---------------------------------------------------------------------------

struct EliminationResult {
    /// Reduced covariance over the kept variables; empty if everything was
    /// eliminated.
    std::optional<CovarianceMatrix> sigma;
    /// kept[i] is the original index of reduced variable i.
    std::vector<int> kept;
};

/// Drops every variable with Sigma_ii < rho; such variables never enter the
/// optimal support.
EliminationResult preprocess_eliminate(const CovarianceMatrix& sigma, double rho);

} // namespace spca
