// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line.  Run all with no arguments or one with
// --criterion N.

#include "spca/bounds.hpp"
#include "spca/core.hpp"
#include "spca/detect.hpp"
#include "spca/experiment.hpp"
#include "spca/oracle.hpp"
#include "spca/relax.hpp"

#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace spca;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
};

double min_eig(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        ((m + m.transpose()) / 2.0).eval(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// 1. Proposition-1 sandwich: n rho theta_r(psi/(n rho)) - 3 se <= phi_exact
//    <= psi_upper + tol over >= 50 random instances, tol = 1e-3, 1e6 samples.
Outcome criterion_1() {
    Outcome out;
    CounterRng rng(10101);
    const double tol = 1e-3;
    const int instances = 50;
    double worst_left = 1e300, worst_right = 1e300;
    for (int t = 0; t < instances; ++t) {
        const int n = 4 + t % 9;  // cycles 4..12
        const int m = n + static_cast<int>(rng.next_unit() * n);
        const CovarianceMatrix sigma = test::wishart_cov(rng, n, m);
        const double rho = (0.05 + 0.9 * rng.next_unit()) * sigma.diagonal_min();

        const FactorMatrix a = factor_root(sigma);
        const SmoothingParams params = SmoothingParams::make(n, default_epsilon(tol));
        const RelaxationResult res = solve_psi(a, rho, params, tol, 300);
        const double phi = phi_exact(sigma, rho).value;

        RatioFunctions cfg;
        cfg.mc_samples = 1'000'000;
        cfg.seed = rng.next_u64();
        const SandwichCertificate cert =
            sandwich(std::max(res.psi_lower, 0.0), n, rho, std::max(res.rank, 2),
                     cfg, res.psi_upper);

        const double left_margin = phi - (cert.lower - 3.0 * cert.lower_std_error);
        const double right_margin = res.psi_upper + tol - phi;
        worst_left = std::min(worst_left, left_margin);
        worst_right = std::min(worst_right, right_margin);
        if (left_margin < 0.0 || right_margin < 0.0) out.pass = false;
    }
    out.detail << instances << " instances, worst margins: lower " << worst_left
               << ", upper " << worst_right;
    return out;
}

// 2. Smoothing sandwich (1-eps) lambda_max - eps <= f <= lambda_max on 100
//    random symmetric PSD matrices (n=50) for eps in {0.1, 0.01}.
Outcome criterion_2() {
    Outcome out;
    CounterRng rng(20202);
    const int n = 50;
    int violations = 0;
    double worst = 1e300;
    for (double eps : {0.1, 0.01}) {
        const SmoothingParams p = SmoothingParams::make(n, eps);
        for (int t = 0; t < 100; ++t) {
            const double scale = 0.5 + 4.0 * rng.next_unit();
            const int m = t % 3 == 0 ? n / 2 : n + n / 2;  // mix ranks
            const Eigen::MatrixXd z = scale * test::wishart(rng, n, m);
            const double f = smooth_value(z, p);
            const double lam = sym_eig(z).values(0);
            const double lower_margin = f - ((1.0 - eps) * lam - eps);
            const double upper_margin = lam - f;
            worst = std::min({worst, lower_margin, upper_margin});
            if (lower_margin < 0.0 || upper_margin < 0.0) ++violations;
        }
    }
    out.pass = violations == 0;
    out.detail << "200 evaluations, violations: " << violations
               << ", worst margin: " << worst;
    return out;
}

// 3. Gradient check: |directional FD of f - Tr(grad f . H)| <= 1e-4 ||H||_F on
//    50 random (Z, H) pairs with t = 1e-5.
Outcome criterion_3() {
    Outcome out;
    CounterRng rng(30303);
    const int n = 20;
    const SmoothingParams p = SmoothingParams::make(n, 0.1);
    const double step = 1e-5;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Eigen::MatrixXd z = 2.0 * test::random_symmetric(rng, n);
        Eigen::MatrixXd h = test::random_symmetric(rng, n);
        h /= h.norm();
        const DensityMatrix g = smooth_grad(z, p);
        const double fd =
            (smooth_value(z + step * h, p) - smooth_value(z - step * h, p)) /
            (2.0 * step);
        const double lin = (g.matrix().array() * h.array()).sum();
        const double err = std::abs(fd - lin);
        worst = std::max(worst, err);
        if (err > 1e-4) out.pass = false;
    }
    out.detail << "50 pairs, worst |fd - linear|: " << worst << " (<= 1e-4)";
    return out;
}

// 4. LMO optimality: Y >= 0, Y >= B, Tr(XY) = Tr(X^{1/2} B X^{1/2})_+ within
//    1e-8, and the dual witness 0 <= P <= X with Tr(PB) = Tr(XY), 100 blocks.
Outcome criterion_4() {
    Outcome out;
    CounterRng rng(40404);
    double worst = 1e300;
    for (int t = 0; t < 100; ++t) {
        const int n = 5 + t % 16;
        Eigen::MatrixXd w = test::wishart(rng, n, n + 2);
        w /= w.trace();
        const double mix = 0.05 + 0.5 * rng.next_unit();
        const DensityMatrix x = DensityMatrix::from_matrix(
            ((1.0 - mix) * w + mix * Eigen::MatrixXd::Identity(n, n) / n).eval());
        const Eigen::VectorXd a = test::gaussian_vector(rng, n);
        // every tenth block exercises the rho >= ||a||^2 zero branch
        const double rho = t % 10 == 9 ? a.squaredNorm() * 1.1
                                       : (0.05 + 0.9 * rng.next_unit()) * a.squaredNorm();
        const Eigen::MatrixXd b =
            a * a.transpose() - rho * Eigen::MatrixXd::Identity(n, n);

        const LmoResult lmo = lmo_block(x, a, rho);
        const Eigen::MatrixXd xs = x.sqrt();
        const SymEig meig = sym_eig((xs * b * xs).eval());
        double trace_plus = 0.0;
        for (int i = 0; i < n; ++i) trace_plus += std::max(meig.values(i), 0.0);

        const double e1 = min_eig(lmo.y_block);
        const double e2 = min_eig(lmo.y_block - b);
        const double v1 = std::abs((x.matrix() * lmo.y_block).trace() - trace_plus);

        Eigen::MatrixXd p_mat = Eigen::MatrixXd::Zero(n, n);
        if (lmo.objective_term > 0.0) {
            const Eigen::VectorXd v = meig.vectors.col(0);
            p_mat = xs * v * v.transpose() * xs;
        }
        const double e3 = min_eig(p_mat);
        const double e4 = min_eig(x.matrix() - p_mat);
        const double v2 = std::abs((p_mat * b).trace() - lmo.objective_term);

        worst = std::min({worst, e1 + 1e-8, e2 + 1e-8, e3 + 1e-8, e4 + 1e-8,
                          1e-8 - v1, 1e-8 - v2});
        if (e1 < -1e-8 || e2 < -1e-8 || e3 < -1e-8 || e4 < -1e-8 || v1 > 1e-8 ||
            v2 > 1e-8)
            out.pass = false;
    }
    out.detail << "100 blocks, worst slack: " << worst;
    return out;
}

// 5. Solver convergence: 10 Wishart instances (n=30, m=30) reach a certified
//    gap <= 0.05 within 5000 iterations.
Outcome criterion_5() {
    Outcome out;
    CounterRng rng(50505);
    const int n = 30, m = 30;
    const double tol = 0.05;
    const SmoothingParams params = SmoothingParams::make(n, default_epsilon(tol));
    int worst_iter = 0;
    for (int t = 0; t < 10; ++t) {
        const CovarianceMatrix sigma = test::wishart_cov(rng, n, m);
        const double rho = (0.2 + 0.6 * rng.next_unit()) * sigma.diagonal_min();
        const RelaxationResult res = solve_psi(factor_root(sigma), rho, params,
                                               tol, 5000);
        worst_iter = std::max(worst_iter, res.iterations);
        if (!res.converged || res.gap_trace.back().gap > tol) out.pass = false;
    }
    out.detail << "10 instances converged, max iterations: " << worst_iter
               << " (<= 5000)";
    return out;
}

// 6. theta identities: closed form vs 1e7-sample Monte Carlo at five points,
//    the x -> infinity expansion at x = 100, and theta <= theta_5 pointwise.
Outcome criterion_6() {
    Outcome out;
    double worst_sigmas = 0.0;
    for (double x : {0.25, 0.5, 1.0, 2.0, 5.0}) {
        CounterRng rng = CounterRng(60606).derived(static_cast<std::uint64_t>(x * 100));
        const std::int64_t samples = 10'000'000;
        double s = 0.0, s2 = 0.0;
        for (std::int64_t i = 0; i < samples; ++i) {
            const double xi = rng.next_gaussian();
            const double v = std::max(x * xi * xi - 1.0, 0.0);
            s += v;
            s2 += v * v;
        }
        const double mean = s / samples;
        const double se =
            std::sqrt((s2 - samples * mean * mean) / (samples - 1.0) / samples);
        const double sigmas = std::abs(vartheta(x) - mean) / se;
        worst_sigmas = std::max(worst_sigmas, sigmas);
        if (sigmas > 3.0) out.pass = false;
    }

    // theta(x)/x = 1 - 1/x + O(x^{-3/2})
    const double expansion_err = std::abs(vartheta(100.0) / 100.0 - (1.0 - 0.01));
    if (expansion_err > 5e-3) out.pass = false;

    double worst_dom = 1e300;
    RatioFunctions cfg;
    cfg.mc_samples = 1'000'000;
    cfg.seed = 606;
    for (double x = 0.0; x <= 2.01; x += 0.25) {
        const McEstimate est = vartheta_r(x, 5, cfg);
        const double slack = est.estimate + 3.0 * est.std_error - vartheta(x);
        worst_dom = std::min(worst_dom, slack);
        if (slack < 0.0) out.pass = false;
    }
    out.detail << "MC worst deviation: " << worst_sigmas
               << " sigma (<= 3); expansion error at x=100: " << expansion_err
               << " (<= 5e-3); dominance worst slack: " << worst_dom;
    return out;
}

// 7. Detection experiment at n=100, m=50, k*=20, theta=3, delta=0.01,
//    rho = 1/n, 200 trials per hypothesis: psi separates with AUC >= 0.90 and
//    >= 3 pooled standard errors; diag-max is visibly weaker.
Outcome criterion_7() {
    Outcome out;
    ExperimentConfig cfg;
    cfg.model.n = 100;
    cfg.model.m = 50;
    cfg.model.k_star = 20;
    cfg.model.theta = 3.0;
    cfg.model.delta = 0.01;
    cfg.model.seed = 70707;
    cfg.trials = 200;
    cfg.rho_mode = RhoMode::Small;
    cfg.tol = 0.1;
    cfg.max_iter = 1200;

    const ExperimentReport rep = run_experiment(cfg);
    const StatSummary& psi = rep.summaries.at("psi");
    const StatSummary& diag = rep.summaries.at("diag_max");
    const StatSummary& lam = rep.summaries.at("lambda_max");

    if (psi.auc < 0.90) out.pass = false;
    if (psi.separation < 3.0) out.pass = false;
    if (!(diag.auc < psi.auc)) out.pass = false;

    out.detail << "auc: psi " << psi.auc << ", lambda_max " << lam.auc
               << ", diag_max " << diag.auc << "; psi separation "
               << psi.separation << " se; non-converged " << rep.non_converged
               << "/400; solver wall " << rep.wall_seconds << " s";
    return out;
}

// 8. Threshold consistency on a 100-point sweep with theta > theta_phi:
//    tau0 <= tau1, beta in (0, 1], theta_psi >= theta_phi, deterministic plans.
Outcome criterion_8() {
    Outcome out;
    CounterRng rng(80808);
    int produced = 0;
    while (produced < 100) {
        ModelConfig cfg;
        cfg.n = 50 + static_cast<int>(rng.next_unit() * 1950);
        cfg.k_star = std::max(1, static_cast<int>(cfg.n * (0.02 + 0.48 * rng.next_unit())));
        cfg.delta = 0.01 + 0.39 * rng.next_unit();
        const double dl = delta_level(cfg.n, cfg.k_star, cfg.delta);
        // m large enough that the guaranteed psi floor stays positive
        const double q = 0.05 + 0.5 * rng.next_unit();
        const double m_ratio = cfg.k_star * (dl + 4.0 / std::numbers::e) / q;
        const double m_tail = 4.0 * std::log(1.0 / cfg.delta) / std::pow(0.9 - q, 2);
        cfg.m = static_cast<int>(std::ceil(std::max(m_ratio, m_tail))) + 1;
        cfg.seed = rng.next_u64();

        const ThetaThresholds th =
            theta_thresholds(cfg.n, cfg.m, cfg.k_star, cfg.delta);
        cfg.theta = th.theta_phi * (1.0 + rng.next_unit());

        const DetectionPlan plan = make_plan(cfg, RhoMode::Optimal);
        const DetectionPlan again = make_plan(cfg, RhoMode::Optimal);
        ++produced;

        if (!(plan.tau0 <= plan.tau1 + 1e-10)) out.pass = false;
        if (plan.beta_vacuous || !(plan.beta > 0.0 && plan.beta <= 1.0))
            out.pass = false;
        if (!(plan.theta_psi >= plan.theta_phi)) out.pass = false;
        if (plan_to_text(plan) != plan_to_text(again)) out.pass = false;
    }
    out.detail << produced << " configurations with theta > theta_phi";
    return out;
}

// 9. Invariance: certified intervals from (Sigma, A) vs (Sigma, QA) and from
//    Sigma vs P Sigma P^T overlap within 2 tol on 20 instances (n=10).
Outcome criterion_9() {
    Outcome out;
    CounterRng rng(90909);
    const int n = 10;
    const double tol = 0.01;
    const SmoothingParams params = SmoothingParams::make(n, default_epsilon(tol));
    double worst = 1e300;
    for (int t = 0; t < 20; ++t) {
        const CovarianceMatrix sigma = test::wishart_cov(rng, n, n + 5);
        const double rho = (0.1 + 0.8 * rng.next_unit()) * sigma.diagonal_min();
        const FactorMatrix a = factor_root(sigma);
        const RelaxationResult base = solve_psi(a, rho, params, tol, 6000);

        const Eigen::MatrixXd q = test::random_orthogonal(rng, n);
        const FactorMatrix qa = FactorMatrix::from_root((q * a.matrix()).eval(), sigma);
        const RelaxationResult rot = solve_psi(qa, rho, params, tol, 6000);

        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[static_cast<int>(rng.next_unit() * (i + 1))]);
        Eigen::MatrixXd ps(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                ps(i, j) = sigma.entries()(perm[i], perm[j]);
        const RelaxationResult per = solve_psi(
            factor_root(CovarianceMatrix::from_matrix(ps)), rho, params, tol, 6000);

        for (const RelaxationResult* other : {&rot, &per}) {
            const double overlap = std::min(base.psi_upper, other->psi_upper) -
                                   std::max(base.psi_lower, other->psi_lower);
            worst = std::min(worst, overlap + 2.0 * tol);
            if (overlap < -2.0 * tol) out.pass = false;
        }
    }
    out.detail << "20 instances, worst overlap slack: " << worst;
    return out;
}

const char* kDescriptions[] = {
    "Proposition-1 sandwich on random instances",
    "smoothing sandwich, zero violations",
    "gradient vs finite differences",
    "LMO feasibility and duality certificate",
    "Frank-Wolfe convergence at n=30",
    "theta closed form, expansion and dominance",
    "detection experiment separation",
    "threshold consistency sweep",
    "square-root and permutation invariance",
};

int run_one(int idx) {
    using Clock = std::chrono::steady_clock;
    Outcome (*fns[])() = {criterion_1, criterion_2, criterion_3,
                          criterion_4, criterion_5, criterion_6,
                          criterion_7, criterion_8, criterion_9};
    const auto t0 = Clock::now();
    Outcome out;
    try {
        out = fns[idx - 1]();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << idx << ": "
              << kDescriptions[idx - 1] << " (" << out.detail.str() << ") ["
              << secs << " s]" << std::endl;
    return out.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            only = std::atoi(argv[++i]);
        else if (std::strcmp(argv[i], "--list") == 0) {
            for (int c = 1; c <= 9; ++c)
                std::cout << c << ": " << kDescriptions[c - 1] << '\n';
            return 0;
        }
    }
    int failures = 0;
    if (only >= 1 && only <= 9) {
        failures = run_one(only);
    } else {
        for (int c = 1; c <= 9; ++c) failures += run_one(c);
    }
    return failures;
}
