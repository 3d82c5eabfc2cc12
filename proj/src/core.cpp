#include "spca/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spca {

namespace {

void require_square_finite(const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw InputError(std::string(what) + ": matrix must be square and nonempty");
    if (!m.allFinite())
        throw NumericalError(std::string(what) + ": non-finite entries");
}

// Exact symmetrization; rejects asymmetry beyond rounding noise.
Eigen::MatrixXd symmetrize_checked(Eigen::MatrixXd m, const char* what) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double skew = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (skew > 1e-12 * scale)
        throw InputError(std::string(what) + ": matrix is not symmetric");
    return ((m + m.transpose()) / 2.0).eval();
}

} // namespace

SymEig sym_eig(const Eigen::MatrixXd& s) {
    require_square_finite(s, "sym_eig");
    const Eigen::MatrixXd sym = ((s + s.transpose()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success)
        throw NumericalError("sym_eig: eigendecomposition failed");
    const Eigen::Index n = s.rows();
    SymEig out;
    out.values = es.eigenvalues().reverse();
    out.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        out.vectors.col(j) = es.eigenvectors().col(n - 1 - j);
    return out;
}

double gaussian_cdf(double t) {
    return 0.5 * std::erfc(-t / std::sqrt(2.0));
}

// --- CovarianceMatrix -------------------------------------------------------

CovarianceMatrix CovarianceMatrix::from_matrix(Eigen::MatrixXd sigma) {
    require_square_finite(sigma, "CovarianceMatrix");
    Eigen::MatrixXd sym = symmetrize_checked(std::move(sigma), "CovarianceMatrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("CovarianceMatrix: eigendecomposition failed");
    const double lam_min = es.eigenvalues().minCoeff();
    const double lam_abs = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lam_min < -1e-8 * std::max(lam_abs, 1e-300))
        throw InputError("CovarianceMatrix: matrix is not positive semidefinite");
    return CovarianceMatrix(std::move(sym));
}

OrderedCovariance CovarianceMatrix::from_matrix_ordered(Eigen::MatrixXd sigma) {
    CovarianceMatrix base = from_matrix(std::move(sigma));
    const int n = base.dim();
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    const Eigen::VectorXd diag = base.entries().diagonal();
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int a, int b) { return diag(a) > diag(b); });
    Eigen::MatrixXd reordered(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            reordered(i, j) = base.entries()(perm[static_cast<std::size_t>(i)],
                                             perm[static_cast<std::size_t>(j)]);
    return OrderedCovariance{CovarianceMatrix(std::move(reordered)), std::move(perm)};
}

// --- FactorMatrix -----------------------------------------------------------

FactorMatrix FactorMatrix::from_root(Eigen::MatrixXd a, const CovarianceMatrix& sigma) {
    require_square_finite(a, "FactorMatrix");
    if (a.rows() != sigma.dim())
        throw InputError("FactorMatrix: root dimension does not match Sigma");
    const Eigen::MatrixXd gram = a.transpose() * a;
    const double rel = (gram - sigma.entries()).norm() /
                       std::max(sigma.entries().norm(), 1e-300);
    if (rel > 1e-8)
        throw InputError("FactorMatrix: A^T A does not reproduce Sigma");
    Eigen::VectorXd norms2 = a.colwise().squaredNorm();
    return FactorMatrix(std::move(a), std::move(norms2));
}

Eigen::MatrixXd FactorMatrix::gram() const {
    Eigen::MatrixXd g = a_.transpose() * a_;
    return ((g + g.transpose()) / 2.0).eval();
}

FactorMatrix factor_root(const CovarianceMatrix& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.entries());
    if (es.info() != Eigen::Success)
        throw NumericalError("factor_root: eigendecomposition failed");
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double lam_abs = lam.cwiseAbs().maxCoeff();
    if (lam.minCoeff() < -1e-8 * std::max(lam_abs, 1e-300))
        throw InputError("factor_root: matrix is not positive semidefinite");
    const Eigen::VectorXd sqrt_lam = lam.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd a = es.eigenvectors() * sqrt_lam.asDiagonal() *
                        es.eigenvectors().transpose();
    a = ((a + a.transpose()) / 2.0).eval();
    return FactorMatrix::from_root(std::move(a), sigma);
}

// --- Gaussian spiked model ---------------------------------------------------

const char* hypothesis_name(Hypothesis h) {
    switch (h) {
        case Hypothesis::H0: return "H0";
        case Hypothesis::H1: return "H1";
        default: return "unknown";
    }
}

void ModelConfig::validate() const {
    if (n < 1 || m < 1)
        throw InputError("ModelConfig: n and m must be positive");
    if (k_star < 1 || k_star > n)
        throw InputError("ModelConfig: k_star must lie in [1, n]");
    if (theta < 0.0)
        throw InputError("ModelConfig: theta must be nonnegative");
    if (!(delta > 0.0 && delta <= 0.5))
        throw InputError("ModelConfig: delta must lie in (0, 1/2]");
    if (spike_vector) {
        if (spike_vector->size() != n)
            throw InputError("ModelConfig: spike vector has wrong dimension");
        if (std::abs(spike_vector->norm() - 1.0) > 1e-12)
            throw InputError("ModelConfig: spike vector must have unit norm");
        int card = 0;
        for (Eigen::Index i = 0; i < spike_vector->size(); ++i)
            if ((*spike_vector)(i) != 0.0) ++card;
        if (card > k_star)
            throw InputError("ModelConfig: spike vector cardinality exceeds k_star");
    }
}

Eigen::VectorXd ModelConfig::effective_spike() const {
    if (spike_vector)
        return *spike_vector;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v.head(k_star).setConstant(1.0 / std::sqrt(static_cast<double>(k_star)));
    return v;
}

SampleSet sample_model(const ModelConfig& config, Hypothesis hypothesis) {
    config.validate();
    if (hypothesis == Hypothesis::Unknown)
        throw InputError("sample_model: hypothesis must be H0 or H1");

    SampleSet out;
    out.m = config.m;
    out.label = hypothesis;
    out.points.resize(config.n, config.m);

    // One hypothesis-independent normal stream: H1 applies the spike
    // transform to the same draws, so theta = 0 coincides with H0.
    CounterRng rng = CounterRng(config.seed).derived(0x5A4D);
    for (int j = 0; j < config.m; ++j)
        for (int i = 0; i < config.n; ++i)
            out.points(i, j) = rng.next_gaussian();

    if (hypothesis == Hypothesis::H1 && config.theta > 0.0) {
        const Eigen::VectorXd v = config.effective_spike();
        // x = z + (sqrt(1+theta) - 1) (v^T z) v gives covariance I + theta v v^T
        const double c = std::sqrt(1.0 + config.theta) - 1.0;
        const Eigen::RowVectorXd proj = v.transpose() * out.points;
        out.points.noalias() += c * v * proj;
    }
    return out;
}

CovarianceMatrix sample_covariance(const SampleSet& samples) {
    if (samples.m < 1 || samples.points.cols() != samples.m)
        throw InputError("sample_covariance: need at least one sample");
    if (samples.points.rows() < 1)
        throw InputError("sample_covariance: empty points");
    if (!samples.points.allFinite())
        throw NumericalError("sample_covariance: non-finite sample");
    const int n = static_cast<int>(samples.points.rows());
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(samples.points,
                                                     1.0 / samples.m);
    sigma.triangularView<Eigen::StrictlyUpper>() =
        sigma.transpose().triangularView<Eigen::StrictlyUpper>();
    return CovarianceMatrix::from_matrix(std::move(sigma));
}

// --- Variable elimination -----------------------------------------------------

EliminationResult preprocess_eliminate(const CovarianceMatrix& sigma, double rho) {
    if (!(rho > 0.0))
        throw InputError("preprocess_eliminate: rho must be positive");
    EliminationResult out;
    const int n = sigma.dim();
    for (int i = 0; i < n; ++i)
        if (sigma.entries()(i, i) >= rho)
            out.kept.push_back(i);
    if (out.kept.empty())
        return out;
    const int p = static_cast<int>(out.kept.size());
    Eigen::MatrixXd reduced(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            reduced(i, j) = sigma.entries()(out.kept[static_cast<std::size_t>(i)],
                                            out.kept[static_cast<std::size_t>(j)]);
    out.sigma = CovarianceMatrix::from_matrix(std::move(reduced));
    return out;
}

} // namespace spca
