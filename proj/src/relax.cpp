#include "spca/relax.hpp"

#include "spca/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

namespace spca {

namespace {

// --- eigenvalue water-filling ------------------------------------------------
//
// Solve sum_i max(floor, exp((y_i + lambda)/beta - 1)) = 1 for lambda.  Work in
// c = (y_max + lambda)/beta - 1 so every exponent is <= c <= ~0; bisection
// isolates the active set, then c is recovered in closed form on it, which
// makes the trace exact to rounding.
Eigen::VectorXd water_fill(const Eigen::VectorXd& y, const SmoothingParams& p) {
    const int n = static_cast<int>(y.size());
    const double ymax = y.maxCoeff();
    const Eigen::ArrayXd d = (y.array() - ymax) / p.beta;  // <= 0

    const auto mass = [&](double c) {
        return (d + c).exp().max(p.floor).sum();
    };

    double lo = std::log((1.0 - p.epsilon) / n) - 1e-9;
    double hi = 1e-9;
    for (int it = 0; it < 80; ++it) {
        const double c = 0.5 * (lo + hi);
        (mass(c) > 1.0 ? hi : lo) = c;
    }
    const double c_mid = 0.5 * (lo + hi);

    // exact closed form on the isolated active set
    const Eigen::ArrayXd ed = d.exp();
    double active_sum = 0.0;
    int inactive = 0;
    for (int i = 0; i < n; ++i) {
        if (std::exp(d[i] + c_mid) > p.floor)
            active_sum += ed[i];
        else
            ++inactive;
    }
    Eigen::VectorXd x(n);
    if (active_sum > 0.0) {
        const double ec = (1.0 - inactive * p.floor) / active_sum;
        bool consistent = ec > 0.0;
        for (int i = 0; i < n && consistent; ++i) {
            const bool was_active = std::exp(d[i] + c_mid) > p.floor;
            const double xi = ec * ed[i];
            if (was_active ? (xi < p.floor * (1.0 - 1e-9))
                           : (xi > p.floor * (1.0 + 1e-9)))
                consistent = false;
        }
        if (consistent) {
            for (int i = 0; i < n; ++i)
                x[i] = std::max(p.floor, ec * ed[i]);
            if (std::abs(x.sum() - 1.0) <= 1e-12)
                return x;
        }
    }
    // fall back to the plain bisection point
    x = (d + c_mid).exp().max(p.floor).matrix();
    if (std::abs(x.sum() - 1.0) > 1e-12)
        throw NumericalError("water_fill: bisection failed to normalize the trace");
    return x;
}

double entropy_value(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                     const SmoothingParams& p) {
    const double d_x = (x.array() * x.array().log()).sum() + std::log(double(p.n));
    return y.dot(x) - p.beta * d_x;
}

// --- rank-one block subproblem in the eigenbasis ------------------------------
//
// With X = V diag(x) V^T and atil = V^T a_i, the positive eigenvalue alpha of
// X^{1/2} B_i X^{1/2} solves sum_j x_j atil_j^2 / (rho x_j + alpha) = 1.  A
// positive root exists iff sum over active coordinates of atil_j^2 > rho.
// Returns 0 when there is none.
double secular_alpha(const Eigen::VectorXd& x, const Eigen::VectorXd& atil,
                     double rho) {
    const int n = static_cast<int>(x.size());
    double reach = 0.0;     // limit of the secular sum at alpha -> 0+
    double h2sum = 0.0;     // ||X^{1/2} a||^2
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = 0.0;
    for (int j = 0; j < n; ++j) {
        if (x[j] <= 0.0) continue;
        const double a2 = atil[j] * atil[j];
        reach += a2;
        h2sum += x[j] * a2;
        xmin = std::min(xmin, x[j]);
        xmax = std::max(xmax, x[j]);
    }
    if (!(reach > rho))
        return 0.0;

    double lo = std::max(0.0, h2sum - rho * xmax);
    double hi = std::max(lo, h2sum - rho * xmin);
    double alpha = hi;
    for (int it = 0; it < 100; ++it) {
        double phi = 0.0, dphi = 0.0;
        for (int j = 0; j < n; ++j) {
            if (x[j] <= 0.0) continue;
            const double h2 = x[j] * atil[j] * atil[j];
            const double den = rho * x[j] + alpha;
            phi += h2 / den;
            dphi -= h2 / (den * den);
        }
        if (phi > 1.0) lo = std::max(lo, alpha);
        else hi = std::min(hi, alpha);
        double next = alpha - (phi - 1.0) / dphi;
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - alpha) <= 1e-15 * std::max(1.0, alpha)) {
            alpha = next;
            break;
        }
        alpha = next;
    }
    return alpha;
}

void check_smoothing_sandwich(double f, double lam_max, const SmoothingParams& p) {
    const double slack = 1e-7 * std::max(1.0, std::abs(lam_max));
    if (f > lam_max + slack ||
        f < (1.0 - p.epsilon) * lam_max - p.epsilon - slack)
        throw NumericalError("smoothing sandwich violated on an evaluated iterate");
}

} // namespace

// --- SmoothingParams ----------------------------------------------------------

SmoothingParams SmoothingParams::make(int n, double epsilon) {
    if (n < 2)
        throw InputError("SmoothingParams: n must be at least 2");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw InputError("SmoothingParams: epsilon must lie in (0, 1)");
    SmoothingParams p;
    p.n = n;
    p.epsilon = epsilon;
    p.beta = epsilon / std::log(static_cast<double>(n));
    p.floor = epsilon / n;
    return p;
}

double default_epsilon(double tol) {
    if (!(tol > 0.0))
        throw InputError("default_epsilon: tol must be positive");
    return std::min(0.05, tol / 4.0);
}

// --- DensityMatrix --------------------------------------------------------------

DensityMatrix DensityMatrix::from_matrix(Eigen::MatrixXd x) {
    if (x.rows() != x.cols() || x.rows() == 0)
        throw InputError("DensityMatrix: matrix must be square and nonempty");
    if (!x.allFinite())
        throw NumericalError("DensityMatrix: non-finite entries");
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if ((x - x.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InputError("DensityMatrix: matrix is not symmetric");
    Eigen::MatrixXd sym = ((x + x.transpose()) / 2.0).eval();
    if (std::abs(sym.trace() - 1.0) > 1e-10)
        throw InputError("DensityMatrix: trace must equal 1");
    SymEig eig = sym_eig(sym);
    if (eig.values(eig.values.size() - 1) < -1e-10)
        throw InputError("DensityMatrix: matrix is not positive semidefinite");
    return DensityMatrix(std::move(sym), std::move(eig));
}

DensityMatrix DensityMatrix::identity_over_n(int n) {
    if (n < 1)
        throw InputError("DensityMatrix: n must be positive");
    return from_matrix(Eigen::MatrixXd::Identity(n, n) / n);
}

DensityMatrix DensityMatrix::rank_one(const Eigen::VectorXd& v) {
    const double n2 = v.squaredNorm();
    if (!(n2 > 0.0))
        throw InputError("DensityMatrix: zero vector");
    return from_matrix(v * v.transpose() / n2);
}

Eigen::MatrixXd DensityMatrix::sqrt() const {
    const Eigen::VectorXd s = eig_.values.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd r = eig_.vectors * s.asDiagonal() * eig_.vectors.transpose();
    return ((r + r.transpose()) / 2.0).eval();
}

Eigen::MatrixXd DensityMatrix::inv_sqrt() const {
    if (min_eigenvalue() <= 1e-12)
        throw NumericalError("DensityMatrix: not invertible within tolerance");
    const Eigen::VectorXd s = eig_.values.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd r = eig_.vectors * s.asDiagonal() * eig_.vectors.transpose();
    return ((r + r.transpose()) / 2.0).eval();
}

// --- smoothed value and gradient -------------------------------------------------

double smooth_value(const Eigen::MatrixXd& z, const SmoothingParams& params) {
    if (z.rows() != params.n || z.cols() != params.n)
        throw InputError("smooth_value: dimension mismatch with params");
    const SymEig eig = sym_eig(z);
    const Eigen::VectorXd x = water_fill(eig.values, params);
    return entropy_value(eig.values, x, params);
}

DensityMatrix smooth_grad(const Eigen::MatrixXd& z, const SmoothingParams& params) {
    if (z.rows() != params.n || z.cols() != params.n)
        throw InputError("smooth_grad: dimension mismatch with params");
    const SymEig eig = sym_eig(z);
    const Eigen::VectorXd x = water_fill(eig.values, params);
    Eigen::MatrixXd m = eig.vectors * x.asDiagonal() * eig.vectors.transpose();
    return DensityMatrix::from_matrix(std::move(m));
}

// --- block subproblem -------------------------------------------------------------

LmoResult lmo_block(const DensityMatrix& x, const Eigen::VectorXd& a_i, double rho) {
    const int n = x.dim();
    if (a_i.size() != n)
        throw InputError("lmo_block: vector dimension mismatch");
    if (!(rho > 0.0))
        throw InputError("lmo_block: rho must be positive");

    LmoResult out;
    out.y_block = Eigen::MatrixXd::Zero(n, n);
    if (rho >= a_i.squaredNorm())
        return out;

    if (x.min_eigenvalue() <= 1e-12)
        throw NumericalError("lmo_block: X not invertible within tolerance");

    const SymEig& eig = x.eig();
    const Eigen::VectorXd xv = eig.values.cwiseMax(0.0);
    const Eigen::VectorXd atil = eig.vectors.transpose() * a_i;
    const double alpha = secular_alpha(xv, atil, rho);

    // u = X^{-1/2} v with v the leading eigenvector of X^{1/2} B_i X^{1/2}
    Eigen::VectorXd t = atil.array() / (rho * xv.array() + alpha);
    const double wnorm = std::sqrt((xv.array() * t.array().square()).sum());
    Eigen::VectorXd u = (eig.vectors * t) / wnorm;
    out.y_block = alpha * u * u.transpose();
    out.y_block = ((out.y_block + out.y_block.transpose()) / 2.0).eval();
    out.objective_term = alpha;
    return out;
}

double psi_primal_value(const DensityMatrix& x, const FactorMatrix& a, double rho) {
    const int n = x.dim();
    if (a.dim() != n)
        throw InputError("psi_primal_value: dimension mismatch");
    if (!(rho > 0.0))
        throw InputError("psi_primal_value: rho must be positive");

    const SymEig& eig = x.eig();
    const Eigen::VectorXd xv = eig.values.cwiseMax(0.0);
    const Eigen::MatrixXd atil = eig.vectors.transpose() * a.matrix();
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        total += secular_alpha(xv, atil.col(i), rho);
    return total;
}

// --- Frank-Wolfe solver --------------------------------------------------------------

RelaxationResult solve_psi(const FactorMatrix& a, double rho,
                           const SmoothingParams& params, double tol, int max_iter) {
    const int n = a.dim();
    if (params.n != n)
        throw InputError("solve_psi: params built for a different dimension");
    if (!(rho > 0.0))
        throw InputError("solve_psi: rho must be positive");
    if (!(tol > 0.0))
        throw InputError("solve_psi: tol must be positive");
    if (max_iter < 1)
        throw InputError("solve_psi: max_iter must be at least 1");

    // variables with ||a_i||^2 <= rho contribute identically zero terms
    std::vector<int> kept;
    for (int i = 0; i < n; ++i)
        if (a.column_norms2()(i) > rho)
            kept.push_back(i);
    if (kept.empty())
        throw EmptyProblemError("solve_psi: empty problem after preprocessing");
    const int p = static_cast<int>(kept.size());
    Eigen::MatrixXd ak(n, p);
    for (int c = 0; c < p; ++c)
        ak.col(c) = a.matrix().col(kept[static_cast<std::size_t>(c)]);

    // Z_0 = sum_i (B_i)_+ = sum_i (||a_i||^2 - rho) ahat_i ahat_i^T, feasible
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < p; ++c) {
        const double n2 = ak.col(c).squaredNorm();
        z.selfadjointView<Eigen::Lower>().rankUpdate(ak.col(c), (n2 - rho) / n2);
    }
    z.triangularView<Eigen::StrictlyUpper>() =
        z.transpose().triangularView<Eigen::StrictlyUpper>();

    double psi_lower = -std::numeric_limits<double>::infinity();
    double psi_upper = std::numeric_limits<double>::infinity();
    std::vector<TracePoint> trace;
    trace.reserve(static_cast<std::size_t>(std::min(max_iter, 1 << 20)));
    int iterations = 0;
    bool converged = false;

    Eigen::MatrixXd z_best = z;
    Eigen::VectorXd x_best_vals;
    Eigen::MatrixXd x_best_vecs;

    Eigen::MatrixXd atil(n, p), s(n, n), w(n, n);
    Eigen::VectorXd t(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;

    for (int k = 1; k <= max_iter; ++k) {
        es.compute(z);
        if (es.info() != Eigen::Success)
            throw NumericalError("solve_psi: eigendecomposition failed");
        const Eigen::VectorXd& y = es.eigenvalues();
        const Eigen::MatrixXd& v = es.eigenvectors();
        const double lam_max = y(n - 1);
        if (!std::isfinite(lam_max))
            throw NumericalError("solve_psi: non-finite iterate");

        const Eigen::VectorXd x = water_fill(y, params);
        const double f_val = entropy_value(y, x, params);
        check_smoothing_sandwich(f_val, lam_max, params);

        if (lam_max < psi_upper) {
            psi_upper = lam_max;
            z_best = z;
        }

        // rank-one block optima; their objective terms sum to the primal value
        atil.noalias() = v.transpose() * ak;
        s.setZero();
        double primal = 0.0;
        for (int c = 0; c < p; ++c) {
            const double alpha = secular_alpha(x, atil.col(c), rho);
            if (alpha <= 0.0) continue;
            primal += alpha;
            t = atil.col(c).array() / (rho * x.array() + alpha);
            const double wnorm2 = (x.array() * t.array().square()).sum();
            s.selfadjointView<Eigen::Lower>().rankUpdate(t, alpha / wnorm2);
        }
        if (!std::isfinite(primal))
            throw NumericalError("solve_psi: non-finite primal value");
        if (primal > psi_lower) {
            psi_lower = primal;
            x_best_vals = x;
            x_best_vecs = v;
        }

        const double gap = psi_upper - psi_lower;
        trace.push_back({k, f_val, psi_lower, psi_upper, gap});
        iterations = k;
        if (gap <= tol) {
            converged = true;
            break;
        }
        if (k == max_iter)
            break;

        s.triangularView<Eigen::StrictlyUpper>() =
            s.transpose().triangularView<Eigen::StrictlyUpper>();
        w.noalias() = v * s * v.transpose();
        const double gamma = 2.0 / (k + 2.0);
        z = ((1.0 - gamma) * z + gamma * w).eval();
        z = ((z + z.transpose()) / 2.0).eval();
    }

    // assemble the final primal/dual pair
    Eigen::MatrixXd xf = x_best_vecs * x_best_vals.asDiagonal() * x_best_vecs.transpose();
    const double rank_cut = std::max(params.floor * 1.01, 1e-8);
    return RelaxationResult{
        psi_lower,
        psi_upper,
        DensityMatrix::from_matrix(((xf + xf.transpose()) / 2.0).eval()),
        DualAggregate{std::move(z_best)},
        static_cast<int>((x_best_vals.array() > rank_cut).count()),
        iterations,
        converged,
        std::move(trace)};
}

void write_trace_csv(std::ostream& out, const RelaxationResult& result) {
    out << "iteration,f,psi_lower,psi_upper,gap\n";
    for (const TracePoint& tp : result.gap_trace) {
        out << tp.iteration << ',' << format_double(tp.f_value) << ','
            << format_double(tp.psi_lower) << ',' << format_double(tp.psi_upper)
            << ',' << format_double(tp.gap) << '\n';
    }
}

} // namespace spca
