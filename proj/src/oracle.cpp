#include "spca/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spca {

namespace {

// Visit all size-k subsets of {0..n-1} in lexicographic order.
template <class F>
void for_each_subset(int n, int k, F&& visit) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        visit(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
    const int p = static_cast<int>(idx.size());
    Eigen::MatrixXd out(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    return out;
}

struct BestSupport {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<int> support;

    // strictly better value wins; exact ties fall to the lexicographically
    // smaller support so golden tests are deterministic
    void offer(double v, const std::vector<int>& s) {
        if (v > value ||
            (v == value && std::lexicographical_compare(s.begin(), s.end(),
                                                        support.begin(), support.end()))) {
            value = v;
            support = s;
        }
    }
};

// Zero-padded top eigenvector of Sigma restricted to `support`; entries below
// rounding noise are zeroed and the reported support trimmed accordingly.
SparseSolution assemble_solution(const CovarianceMatrix& sigma,
                                 const std::vector<int>& support, double value,
                                 bool use_min_eigenvector = false) {
    const Eigen::MatrixXd sub = submatrix(sigma.entries(), support);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    if (es.info() != Eigen::Success)
        throw NumericalError("oracle: eigendecomposition failed");
    const Eigen::Index col = use_min_eigenvector ? 0 : sub.rows() - 1;
    Eigen::VectorXd w = es.eigenvectors().col(col);

    const double trim = 1e-12 * w.cwiseAbs().maxCoeff();
    SparseSolution out;
    out.value = value;
    out.vector = Eigen::VectorXd::Zero(sigma.dim());
    for (std::size_t i = 0; i < support.size(); ++i) {
        const double wi = w(static_cast<Eigen::Index>(i));
        if (std::abs(wi) > trim) {
            out.vector(support[i]) = wi;
            out.support.push_back(support[i]);
        }
    }
    out.vector /= out.vector.norm();
    out.cardinality = static_cast<int>(out.support.size());
    return out;
}

double top_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() == 1) return m(0, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

} // namespace

std::int64_t subset_count(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > kEnumerationCap) return kEnumerationCap + 1;
    }
    return c;
}

SparseSolution sparse_lambda_max_exact(const CovarianceMatrix& sigma, int k) {
    const int n = sigma.dim();
    if (k < 1 || k > n)
        throw InputError("sparse_lambda_max_exact: k must lie in [1, n]");
    if (subset_count(n, k) > kEnumerationCap)
        throw InputError("sparse_lambda_max_exact: enumeration cap exceeded");

    BestSupport best;
    for_each_subset(n, k, [&](const std::vector<int>& idx) {
        best.offer(top_eigenvalue(submatrix(sigma.entries(), idx)), idx);
    });
    return assemble_solution(sigma, best.support, best.value);
}

SparseSolution sparse_lambda_min_exact(const CovarianceMatrix& sigma, int k) {
    const int n = sigma.dim();
    if (k < 1 || k > n)
        throw InputError("sparse_lambda_min_exact: k must lie in [1, n]");
    if (subset_count(n, k) > kEnumerationCap)
        throw InputError("sparse_lambda_min_exact: enumeration cap exceeded");

    // lambda_min^k(Sigma) = lambda_max(Sigma) - lambda_max^k(lambda_max(Sigma) I - Sigma)
    const double lam_max = top_eigenvalue(sigma.entries());
    const Eigen::MatrixXd complement =
        lam_max * Eigen::MatrixXd::Identity(n, n) - sigma.entries();
    SparseSolution comp = sparse_lambda_max_exact(
        CovarianceMatrix::from_matrix(complement), k);
    const double via_identity = lam_max - comp.value;

    // direct minimum-eigenvalue enumeration must agree
    double direct = std::numeric_limits<double>::infinity();
    for_each_subset(n, k, [&](const std::vector<int>& idx) {
        const Eigen::MatrixXd sub = submatrix(sigma.entries(), idx);
        double lo;
        if (sub.rows() == 1) {
            lo = sub(0, 0);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
            lo = es.eigenvalues().minCoeff();
        }
        direct = std::min(direct, lo);
    });
    if (std::abs(via_identity - direct) > 1e-10 * std::max(1.0, std::abs(direct)))
        throw NumericalError("sparse_lambda_min_exact: identity and direct paths disagree");

    SparseSolution out = comp;
    out.value = via_identity;
    return out;
}

SparseSolution phi_exact(const CovarianceMatrix& sigma, double rho) {
    const int n = sigma.dim();
    if (!(rho > 0.0))
        throw InputError("phi_exact: rho must be positive");
    std::int64_t total = 0;
    for (int k = 1; k <= n; ++k) {
        total += subset_count(n, k);
        if (total > kEnumerationCap)
            throw InputError("phi_exact: enumeration cap exceeded");
    }

    BestSupport best;
    for (int k = 1; k <= n; ++k) {
        for_each_subset(n, k, [&](const std::vector<int>& idx) {
            const double v = top_eigenvalue(submatrix(sigma.entries(), idx)) - rho * k;
            best.offer(v, idx);
        });
    }
    return assemble_solution(sigma, best.support, best.value);
}

} // namespace spca
