#pragma once

#include "spca/core.hpp"

#include <iosfwd>
#include <vector>

namespace spca {

// ---------------------------------------------------------------------------
// Smoothing of lambda_max
// ---------------------------------------------------------------------------

/// Parameters of the entropy-smoothed lambda_max: coefficient beta = eps/log n
/// and eigenvalue floor eps/n on the gradient matrix.
struct SmoothingParams {
    int n = 0;
    double epsilon = 0.0;
    double beta = 0.0;
    double floor = 0.0;

    static SmoothingParams make(int n, double epsilon);
};

/// min(0.05, tol/4): keeps the smoothing bias clear of the tolerance budget.
double default_epsilon(double tol);

// ---------------------------------------------------------------------------
// Primal iterate
// ---------------------------------------------------------------------------

/// Symmetric PSD matrix with unit trace.  The eigendecomposition is computed
/// once at construction; square roots come from it on demand.
class DensityMatrix {
public:
    static DensityMatrix from_matrix(Eigen::MatrixXd x);
    static DensityMatrix identity_over_n(int n);
    static DensityMatrix rank_one(const Eigen::VectorXd& v);

    int dim() const { return static_cast<int>(x_.rows()); }
    const Eigen::MatrixXd& matrix() const { return x_; }
    const SymEig& eig() const { return eig_; }
    double min_eigenvalue() const { return eig_.values(eig_.values.size() - 1); }

    Eigen::MatrixXd sqrt() const;
    /// Throws NumericalError when the matrix is not invertible within tolerance.
    Eigen::MatrixXd inv_sqrt() const;

private:
    DensityMatrix(Eigen::MatrixXd x, SymEig eig)
        : x_(std::move(x)), eig_(std::move(eig)) {}
    Eigen::MatrixXd x_;
    SymEig eig_;
};

/// Sum of the per-block dual matrices; only the aggregate is ever stored.
struct DualAggregate {
    Eigen::MatrixXd z;
};

// ---------------------------------------------------------------------------
// Smoothed value and gradient
// ---------------------------------------------------------------------------

/// f(Z) = max { Tr(ZX) - (eps/log n)(Tr(X log X) + log n) : Tr X = 1,
/// X >= (eps/n) I }, evaluated through the eigenvalue water-filling.
double smooth_value(const Eigen::MatrixXd& z, const SmoothingParams& params);

/// The maximizer above; also grad f(Z).  Eigenvalues x_i = max{eps/n,
/// exp((y_i + lambda)/beta - 1)} with lambda the unique root of sum x = 1.
DensityMatrix smooth_grad(const Eigen::MatrixXd& z, const SmoothingParams& params);

// ---------------------------------------------------------------------------
// Rank-one block subproblem
// ---------------------------------------------------------------------------

struct LmoResult {
    Eigen::MatrixXd y_block;    // symmetric, rank <= 1
    double objective_term = 0;  // Tr(X Y) = Tr(X^{1/2} B_i X^{1/2})_+
};

/// Minimizes Tr(XY) over { Y >= B_i, Y >= 0 } with B_i = a_i a_i^T - rho I.
/// Returns (0, 0) when rho >= ||a_i||^2; otherwise the rank-one optimum
/// alpha X^{-1/2} v v^T X^{-1/2} with v the leading eigenvector of
/// X^{1/2} B_i X^{1/2} and alpha its (unique) positive eigenvalue.
LmoResult lmo_block(const DensityMatrix& x, const Eigen::VectorXd& a_i, double rho);

/// sum_i Tr(X^{1/2} a_i a_i^T X^{1/2} - rho X)_+ for any feasible X; a lower
/// bound on psi(rho).  Each term has at most one positive eigenvalue.
double psi_primal_value(const DensityMatrix& x, const FactorMatrix& a, double rho);

// ---------------------------------------------------------------------------
// Frank-Wolfe solver
// ---------------------------------------------------------------------------

struct TracePoint {
    int iteration = 0;
    double f_value = 0.0;
    double psi_lower = 0.0;
    double psi_upper = 0.0;
    double gap = 0.0;
};

struct RelaxationResult {
    double psi_lower = 0.0;   // best primal value; certified lower bound
    double psi_upper = 0.0;   // best lambda_max of a dual iterate; upper bound
    DensityMatrix x_final;    // primal matrix achieving psi_lower
    DualAggregate z_final;    // dual aggregate achieving psi_upper
    int rank = 0;             // eigenvalues of x_final above max(1.01 eps/n, 1e-8)
    int iterations = 0;
    bool converged = false;
    std::vector<TracePoint> gap_trace;
};

/// Frank-Wolfe on the smoothed dual: Z_k = (1 - 2/(k+2)) Z_{k-1} + (2/(k+2)) W
/// with W the sum of the rank-one block optima at X = grad f(Z_{k-1}), started
/// from the feasible Z_0 = sum_i (B_i)_+.  Stops when the certified interval
/// [psi_lower, psi_upper] is narrower than tol or max_iter is reached; the
/// interval brackets psi(rho) regardless of convergence.
RelaxationResult solve_psi(const FactorMatrix& a, double rho,
                           const SmoothingParams& params, double tol, int max_iter);

/// Iteration trace as CSV: iteration,f,psi_lower,psi_upper,gap.
void write_trace_csv(std::ostream& out, const RelaxationResult& result);

} // namespace spca
