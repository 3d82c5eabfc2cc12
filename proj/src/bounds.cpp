#include "spca/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

namespace spca {

double vartheta(double x) {
    if (x < 0.0)
        throw InputError("vartheta: x must be nonnegative");
    if (x < 1e-12)
        return 0.0;  // continuous limit; avoids overflow in 1/(2x)
    const double first = std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-0.5 / x);
    return first + 2.0 * (x - 1.0) * gaussian_cdf(-1.0 / std::sqrt(x));
}

McEstimate vartheta_r(double x, int r, const RatioFunctions& cfg) {
    if (x < 0.0)
        throw InputError("vartheta_r: x must be nonnegative");
    if (r < 2)
        throw InputError("vartheta_r: r must be at least 2");
    if (cfg.mc_samples < 10'000)
        throw InputError("vartheta_r: mc_samples must be at least 1e4");

    const std::int64_t total = cfg.mc_samples;
    const std::int64_t chunk = 1 << 16;
    const std::int64_t n_chunks = (total + chunk - 1) / chunk;

    // fixed chunking with per-chunk derived streams: the estimate is
    // bit-identical no matter how many threads run
    std::vector<double> sums(static_cast<std::size_t>(n_chunks), 0.0);
    std::vector<double> sqs(static_cast<std::size_t>(n_chunks), 0.0);
    const CounterRng base = CounterRng(cfg.seed).derived(0x7E7A);

    const auto run_chunk = [&](std::int64_t c) {
        CounterRng rng = base.derived(static_cast<std::uint64_t>(c));
        const std::int64_t lo = c * chunk;
        const std::int64_t hi = std::min(total, lo + chunk);
        double s = 0.0, s2 = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            const double xi1 = rng.next_gaussian();
            double chi = 0.0;
            for (int j = 1; j < r; ++j) {
                const double g = rng.next_gaussian();
                chi += g * g;
            }
            const double v = std::max(x * xi1 * xi1 - chi / (r - 1), 0.0);
            s += v;
            s2 += v * v;
        }
        sums[static_cast<std::size_t>(c)] = s;
        sqs[static_cast<std::size_t>(c)] = s2;
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(
        std::min<std::int64_t>(hw, n_chunks));
    if (workers <= 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::int64_t> next{0};
        for (unsigned wrk = 0; wrk < workers; ++wrk)
            pool.emplace_back([&] {
                for (std::int64_t c; (c = next.fetch_add(1)) < n_chunks;)
                    run_chunk(c);
            });
        for (auto& th : pool) th.join();
    }

    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t c = 0; c < n_chunks; ++c) {
        sum += sums[static_cast<std::size_t>(c)];
        sumsq += sqs[static_cast<std::size_t>(c)];
    }
    const double mean = sum / static_cast<double>(total);
    const double var =
        std::max(0.0, (sumsq - total * mean * mean) / static_cast<double>(total - 1));
    return McEstimate{mean, std::sqrt(var / static_cast<double>(total))};
}

SandwichCertificate sandwich(double psi_estimate, int n, double rho, int r,
                             const RatioFunctions& cfg,
                             std::optional<double> relaxation_upper) {
    if (!(rho > 0.0))
        throw InputError("sandwich: rho must be positive");
    if (psi_estimate < 0.0)
        throw InputError("sandwich: psi estimate must be nonnegative");
    if (n < 1)
        throw InputError("sandwich: n must be positive");
    const McEstimate est = vartheta_r(psi_estimate / (n * rho), std::max(r, 2), cfg);
    SandwichCertificate cert;
    cert.lower = n * rho * est.estimate;
    cert.lower_std_error = n * rho * est.std_error;
    cert.relaxation = relaxation_upper.value_or(psi_estimate);
    cert.rho = rho;
    cert.r = r;
    return cert;
}

double naive_ratio_floor(const CovarianceMatrix& sigma, double rho) {
    if (!(rho > 0.0))
        throw InputError("naive_ratio_floor: rho must be positive");
    if (rho > sigma.diagonal_min())
        throw InputError("naive_ratio_floor: rho must not exceed min_i Sigma_ii");
    const int n = sigma.dim();
    return (sigma.trace() - rho) / (static_cast<double>(n) * n * rho);
}

SparseSolution randomized_round(const DensityMatrix& x, const FactorMatrix& a,
                                double rho, int trials, std::uint64_t seed) {
    const int n = x.dim();
    if (a.dim() != n)
        throw InputError("randomized_round: dimension mismatch");
    if (trials < 1)
        throw InputError("randomized_round: trials must be at least 1");
    if (!(rho > 0.0))
        throw InputError("randomized_round: rho must be positive");

    const Eigen::MatrixXd xsqrt = x.sqrt();
    const Eigen::MatrixXd sigma = a.gram();
    const CounterRng base = CounterRng(seed).derived(0x2077);

    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<int> best_support;
    Eigen::VectorXd xi(n);

    for (int trial = 0; trial < trials; ++trial) {
        CounterRng rng = base.derived(static_cast<std::uint64_t>(trial));
        for (int i = 0; i < n; ++i) xi(i) = rng.next_gaussian();
        const Eigen::VectorXd w = xsqrt * xi;
        // xi^T X^{1/2} B_i X^{1/2} xi = (a_i^T w)^2 - rho ||w||^2
        const Eigen::VectorXd scores = a.matrix().transpose() * w;
        const double threshold = rho * w.squaredNorm();
        std::vector<int> support;
        for (int i = 0; i < n; ++i)
            if (scores(i) * scores(i) > threshold)
                support.push_back(i);
        if (support.empty())
            continue;

        const int p = static_cast<int>(support.size());
        Eigen::MatrixXd sub(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                sub(i, j) = sigma(support[static_cast<std::size_t>(i)],
                                  support[static_cast<std::size_t>(j)]);
        double lam;
        if (p == 1) {
            lam = sub(0, 0);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
            lam = es.eigenvalues().maxCoeff();
        }
        const double value = lam - rho * p;
        if (value > best_value) {
            best_value = value;
            best_support = std::move(support);
        }
    }

    if (best_support.empty()) {
        // every trial rejected everything: best singleton keeps the contract
        int arg = 0;
        a.column_norms2().maxCoeff(&arg);
        best_support = {arg};
        best_value = a.column_norms2()(arg) - rho;
    }

    SparseSolution out;
    out.value = best_value;
    out.support = best_support;
    out.cardinality = static_cast<int>(best_support.size());
    out.vector = Eigen::VectorXd::Zero(n);
    const int p = out.cardinality;
    if (p == 1) {
        out.vector(best_support[0]) = 1.0;
    } else {
        Eigen::MatrixXd sub(p, p);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                sub(i, j) = sigma(best_support[static_cast<std::size_t>(i)],
                                  best_support[static_cast<std::size_t>(j)]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
        const Eigen::VectorXd lead = es.eigenvectors().col(p - 1);
        for (int i = 0; i < p; ++i)
            out.vector(best_support[static_cast<std::size_t>(i)]) = lead(i);
    }
    out.vector /= out.vector.norm();
    return out;
}

} // namespace spca
