#include "spca/oracle.hpp"

#include "spca/relax.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace spca;

namespace {

CovarianceMatrix diag_cov(std::initializer_list<double> d) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
    int i = 0;
    for (double x : d) v(i++) = x;
    return CovarianceMatrix::from_matrix(Eigen::MatrixXd(v.asDiagonal()));
}

} // namespace

TEST_CASE("sparse lambda_max trivial cases") {
    CounterRng rng(3);
    const CovarianceMatrix sigma = test::wishart_cov(rng, 6, 9);
    const SymEig eig = sym_eig(sigma.entries());

    const SparseSolution full = sparse_lambda_max_exact(sigma, 6);
    CHECK(full.value == doctest::Approx(eig.values(0)).epsilon(1e-10));

    const SparseSolution single = sparse_lambda_max_exact(sigma, 1);
    CHECK(single.value == doctest::Approx(sigma.entries().diagonal().maxCoeff()));
    CHECK(single.cardinality == 1);
}

TEST_CASE("sparse lambda_max on diag(3,2,1) with k=2") {
    const SparseSolution sol = sparse_lambda_max_exact(diag_cov({3.0, 2.0, 1.0}), 2);
    CHECK(sol.value == doctest::Approx(3.0));
    // the optimal vector concentrates on the first coordinate
    CHECK(sol.support == std::vector<int>{0});
    CHECK(std::abs(sol.vector(0)) == doctest::Approx(1.0));
}

TEST_CASE("solution vector is consistent with its value and support") {
    CounterRng rng(17);
    for (int t = 0; t < 5; ++t) {
        const CovarianceMatrix sigma = test::wishart_cov(rng, 7, 7);
        const SparseSolution sol = sparse_lambda_max_exact(sigma, 3);
        CHECK(std::abs(sol.vector.norm() - 1.0) <= 1e-12);
        CHECK(sol.vector.transpose() * sigma.entries() * sol.vector ==
              doctest::Approx(sol.value).epsilon(1e-10));
        for (int i = 0; i < 7; ++i) {
            const bool in_support =
                std::find(sol.support.begin(), sol.support.end(), i) != sol.support.end();
            if (!in_support) CHECK(sol.vector(i) == 0.0);
        }
        CHECK(sol.cardinality <= 3);
    }
}

TEST_CASE("sparse lambda_min identities") {
    const CovarianceMatrix d321 = diag_cov({3.0, 2.0, 1.0});
    CHECK(sparse_lambda_min_exact(d321, 2).value == doctest::Approx(1.0));
    CHECK(sparse_lambda_min_exact(d321, 3).value == doctest::Approx(1.0));

    const CovarianceMatrix id =
        CovarianceMatrix::from_matrix(Eigen::MatrixXd::Identity(5, 5));
    for (int k = 1; k <= 5; ++k)
        CHECK(sparse_lambda_min_exact(id, k).value == doctest::Approx(1.0));

    CounterRng rng(29);
    const CovarianceMatrix sigma = test::wishart_cov(rng, 6, 6);
    const SymEig eig = sym_eig(sigma.entries());
    CHECK(sparse_lambda_min_exact(sigma, 6).value ==
          doctest::Approx(eig.values(5)).epsilon(1e-9));
}

TEST_CASE("phi_exact on diagonal and identity instances") {
    const SparseSolution a = phi_exact(diag_cov({3.0, 2.0, 1.0}), 0.5);
    CHECK(a.value == doctest::Approx(2.5));
    CHECK(a.support == std::vector<int>{0});

    const SparseSolution b =
        phi_exact(CovarianceMatrix::from_matrix(Eigen::MatrixXd::Identity(4, 4)), 0.3);
    CHECK(b.value == doctest::Approx(0.7));
    CHECK(b.support == std::vector<int>{0});  // lexicographic tie-break

    // vanishing penalty approaches lambda_max
    CounterRng rng(31);
    const CovarianceMatrix sigma = test::wishart_cov(rng, 6, 9);
    const SymEig eig = sym_eig(sigma.entries());
    CHECK(std::abs(phi_exact(sigma, 1e-9).value - eig.values(0)) <= 1e-6);
}

TEST_CASE("enumeration cap rejects oversized requests") {
    CounterRng rng(37);
    const CovarianceMatrix big = test::wishart_cov(rng, 25, 30);
    CHECK_THROWS_AS(sparse_lambda_max_exact(big, 12), InputError);  // C(25,12) > 2e6
    CHECK(subset_count(25, 12) > kEnumerationCap);
    CHECK(subset_count(12, 3) == 220);
}

TEST_CASE("oracle monotonicity and dominance properties") {
    CounterRng rng(41);
    const CovarianceMatrix sigma = test::wishart_cov(rng, 8, 8);
    const double rho = 0.3 * sigma.diagonal_min();

    double prev = 0.0;
    const SparseSolution phi = phi_exact(sigma, rho);
    for (int k = 1; k <= 8; ++k) {
        const SparseSolution sol = sparse_lambda_max_exact(sigma, k);
        CHECK(sol.value >= prev - 1e-12);  // nondecreasing in k
        CHECK(phi.value >= sol.value - rho * k - 1e-10);
        prev = sol.value;
    }

    // phi nonincreasing in rho
    CHECK(phi_exact(sigma, rho).value >= phi_exact(sigma, 2.0 * rho).value - 1e-12);
    // equals max_k lambda_max^k - rho k
    double best = -1e300;
    for (int k = 1; k <= 8; ++k)
        best = std::max(best, sparse_lambda_max_exact(sigma, k).value - rho * k);
    CHECK(phi.value == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("phi_exact is permutation equivariant") {
    CounterRng rng(43);
    const CovarianceMatrix sigma = test::wishart_cov(rng, 6, 6);
    const double rho = 0.4 * sigma.diagonal_min();
    const SparseSolution base = phi_exact(sigma, rho);

    std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    Eigen::MatrixXd permuted(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            permuted(i, j) = sigma.entries()(perm[i], perm[j]);
    const SparseSolution moved =
        phi_exact(CovarianceMatrix::from_matrix(permuted), rho);
    CHECK(moved.value == doctest::Approx(base.value).epsilon(1e-12));

    std::vector<int> mapped;
    for (int i : moved.support) mapped.push_back(perm[static_cast<std::size_t>(i)]);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == base.support);
}

TEST_CASE("phi_exact equals the vector form at the attaining direction") {
    CounterRng rng(47);
    for (int t = 0; t < 4; ++t) {
        const CovarianceMatrix sigma = test::wishart_cov(rng, 7, 10);
        const double rho = (0.2 + 0.15 * t) * sigma.diagonal_min();
        const SparseSolution sol = phi_exact(sigma, rho);

        // u = A_S w / ||A_S w|| attains max_x sum_i ((a_i^T x)^2 - rho)_+
        const FactorMatrix root = factor_root(sigma);
        Eigen::VectorXd u = root.matrix() * sol.vector;
        u /= u.norm();
        double xform = 0.0;
        for (int i = 0; i < 7; ++i) {
            const double s = root.matrix().col(i).dot(u);
            xform += std::max(s * s - rho, 0.0);
        }
        CHECK(xform == doctest::Approx(sol.value).epsilon(1e-8));
    }
}

TEST_CASE("phi_exact is unchanged by variable elimination") {
    CounterRng rng(53);
    for (int t = 0; t < 4; ++t) {
        // congruence by diag(1,...,1,0.05) keeps PSD and shrinks the last variance
        Eigen::MatrixXd w = test::wishart(rng, 8, 10);
        Eigen::VectorXd scale = Eigen::VectorXd::Ones(8);
        scale(7) = 0.05;
        w = (scale.asDiagonal() * w * scale.asDiagonal()).eval();
        const CovarianceMatrix sigma =
            CovarianceMatrix::from_matrix(((w + w.transpose()) / 2.0).eval());

        Eigen::VectorXd diag = sigma.entries().diagonal();
        const double low = diag(7);
        double second = 1e300;
        for (int i = 0; i < 7; ++i) second = std::min(second, diag(i));
        if (low >= second) continue;
        const double rho = 0.5 * (low + second);

        const EliminationResult elim = preprocess_eliminate(sigma, rho);
        REQUIRE(elim.sigma.has_value());
        REQUIRE(elim.kept.size() < 8);
        CHECK(phi_exact(sigma, rho).value ==
              doctest::Approx(phi_exact(*elim.sigma, rho).value).epsilon(1e-10));
    }
}
