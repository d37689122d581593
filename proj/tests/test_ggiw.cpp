#include "rfse/ggiw.hpp"
#include "rfse/mixture.hpp"
#include "rfse/rng.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace rfse;

namespace {

/// 1-D trapezoid quadrature of the Poisson-gamma marginal pmf of n.
double eta_gamma_quadrature(double alpha, double beta, int n) {
    // Integrand peaks near the posterior gamma mode; integrate generously.
    const double upper = std::max(60.0, 6.0 * (alpha + n) / std::min(1.0, beta));
    const int steps = 200000;
    const double h = upper / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double g = i * h;
        double logf;
        if (g <= 0.0) {
            logf = -std::numeric_limits<double>::infinity();
        } else {
            logf = n * std::log(g) - g - std::lgamma(n + 1.0)                     // Poisson(n; g)
                   + alpha * std::log(beta) - std::lgamma(alpha)                  // GAM(g; a, b)
                   + (alpha - 1.0) * std::log(g) - beta * g;
        }
        const double f = std::exp(logf);
        acc += (i == 0 || i == steps) ? 0.5 * f : f;
    }
    return acc * h;
}

}  // namespace

TEST_CASE("prediction: gamma and extent parameter arithmetic") {
    MotionModel model;
    model.F = Eigen::MatrixXd::Identity(3, 3);
    model.Q = Eigen::MatrixXd::Zero(3, 3);
    model.T = 1.0;
    model.mu = 1.25;
    model.tau = 5.0;

    GGIWParams prior = test::default_ggiw();
    const GGIWParams pred = predict_ggiw(prior, model);

    CHECK(pred.alpha == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(pred.beta == doctest::Approx(0.8).epsilon(1e-12));

    const double v_expected = 10.0 * std::exp(-0.2);
    CHECK(pred.v == doctest::Approx(v_expected).epsilon(1e-12));
    const double V_expected = 100.0 * (v_expected - 3.0) / 7.0;
    CHECK(pred.V(0, 0) == doctest::Approx(V_expected).epsilon(1e-12));
    CHECK(pred.V(0, 1) == doctest::Approx(0.0));

    // identity dynamics leave the Gaussian factor alone
    CHECK((pred.m - prior.m).norm() == doctest::Approx(0.0));
    CHECK((pred.P - prior.P).norm() == doctest::Approx(0.0));
}

TEST_CASE("prediction invariants: rate moments and extent mean ratio") {
    Rng rng(42);
    MotionModel model = MotionModel::decaying_acceleration(1.0, 1.0, 0.1);
    for (int trial = 0; trial < 50; ++trial) {
        const GGIWParams prior = test::random_ggiw(rng);
        const GGIWParams pred = predict_ggiw(prior, model);

        CHECK(pred.alpha / pred.beta == doctest::Approx(prior.alpha / prior.beta).epsilon(1e-12));
        const double var_prior = prior.alpha / (prior.beta * prior.beta);
        const double var_pred = pred.alpha / (pred.beta * pred.beta);
        CHECK(var_pred == doctest::Approx(model.mu * var_prior).epsilon(1e-12));

        const Eigen::MatrixXd ratio_prior = prior.V / (prior.v - 3.0);
        const Eigen::MatrixXd ratio_pred = pred.V / (pred.v - 3.0);
        CHECK((ratio_pred - ratio_prior).norm() <= 1e-12 * ratio_prior.norm());
    }
}

TEST_CASE("prediction clamps the degrees of freedom under repeated application") {
    MotionModel model = MotionModel::decaying_acceleration(1.0, 1.0, 0.1, 1.25, 5.0);
    GGIWParams p = test::default_ggiw();
    const Eigen::MatrixXd ratio0 = p.V / (p.v - 3.0);
    for (int k = 0; k < 60; ++k) {
        p = predict_ggiw(p, model);
        CHECK(p.v > 4.0);
        const Eigen::MatrixXd ratio = p.V / (p.v - 3.0);
        CHECK((ratio - ratio0).norm() <= 1e-9 * ratio0.norm());
        p.validate();
    }
    CHECK(p.v == doctest::Approx(4.0 + 1e-6));
}

TEST_CASE("update: scalar hand example") {
    GGIWParams prior;
    prior.alpha = 10.0;
    prior.beta = 1.0;
    prior.m = Eigen::VectorXd::Zero(1);
    prior.P = Eigen::MatrixXd::Constant(1, 1, 2.0);
    prior.v = 5.0;
    prior.V = Eigen::MatrixXd::Constant(1, 1, 2.0);

    Eigen::RowVectorXd H(1);
    H << 1.0;
    const std::vector<Eigen::VectorXd> W{Eigen::VectorXd::Constant(1, 3.0)};

    const GGIWUpdate up = update_ggiw(prior, W, H);
    CHECK(up.posterior.m(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(up.posterior.P(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(up.posterior.V(0, 0) == doctest::Approx(2.0 + 3.0).epsilon(1e-12));
    CHECK(up.posterior.alpha == doctest::Approx(11.0));
    CHECK(up.posterior.beta == doctest::Approx(2.0));
    CHECK(up.posterior.v == doctest::Approx(6.0));
}

TEST_CASE("update: counting identities and covariance downdates") {
    Rng rng(7);
    Eigen::RowVectorXd H = Eigen::RowVectorXd::Zero(3);
    H(0) = 1.0;
    for (int trial = 0; trial < 30; ++trial) {
        const GGIWParams prior = test::random_ggiw(rng);
        const int n = 1 + static_cast<int>(rng.uniform() * 6);
        auto W = test::cluster_at(rng, observe(H, prior.m, 2), n, 4.0);

        const GGIWUpdate up = update_ggiw(prior, W, H);
        CHECK(up.posterior.alpha - prior.alpha == doctest::Approx(n));
        CHECK(up.posterior.v - prior.v == doctest::Approx(n));
        CHECK(up.posterior.beta - prior.beta == doctest::Approx(1.0));

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prior.P - up.posterior.P);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9);

        // V_W - V - Psi is the rank-one innovation outer product
        Eigen::VectorXd wbar = Eigen::VectorXd::Zero(2);
        for (const auto& w : W) wbar += w;
        wbar /= n;
        Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(2, 2);
        for (const auto& w : W) scatter += (w - wbar) * (w - wbar).transpose();
        const Eigen::MatrixXd R = up.posterior.V - prior.V - scatter;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(R);
        CHECK(er.eigenvalues().minCoeff() >= -1e-9 * std::max(1.0, R.norm()));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
        CHECK(svd.singularValues()(1) <= 1e-9 * std::max(1.0, svd.singularValues()(0)));

        CHECK(std::isfinite(up.log_evidence));
    }
}

TEST_CASE("update: duplicate measurements give zero scatter") {
    GGIWParams prior = test::default_ggiw();
    Eigen::RowVectorXd H = Eigen::RowVectorXd::Zero(3);
    H(0) = 1.0;
    Eigen::VectorXd z(2);
    z << 5.0, -2.0;
    const std::vector<Eigen::VectorXd> W{z, z};
    const GGIWUpdate up = update_ggiw(prior, W, H);

    const double S = prior.P(0, 0) + 0.5;
    const Eigen::VectorXd eps = z - observe(H, prior.m, 2);
    const Eigen::MatrixXd expected_V = prior.V + eps * eps.transpose() / S;
    CHECK((up.posterior.V - expected_V).norm() <= 1e-12 * expected_V.norm());
}

TEST_CASE("update rejects an empty group and bad dimensions") {
    GGIWParams prior = test::default_ggiw();
    Eigen::RowVectorXd H = Eigen::RowVectorXd::Zero(3);
    H(0) = 1.0;
    CHECK_THROWS_AS(update_ggiw(prior, {}, H), std::invalid_argument);
    CHECK_THROWS_AS(update_ggiw(prior, {Eigen::VectorXd::Zero(3)}, H), std::invalid_argument);
}

TEST_CASE("evidence: negative-binomial exact value and identity") {
    GGIWParams prior = test::default_ggiw();
    Eigen::RowVectorXd H = Eigen::RowVectorXd::Zero(3);
    H(0) = 1.0;
    Rng rng(3);
    auto W = test::cluster_at(rng, Eigen::VectorXd::Zero(2), 2);
    const GGIWUpdate up = update_ggiw(prior, W, H);
    CHECK(std::exp(up.log_eta_gamma) == doctest::Approx(55.0 / 4096.0).epsilon(1e-12));

    // For integer alpha the marginal pmf is negative binomial.
    for (int alpha = 1; alpha <= 8; ++alpha) {
        for (double beta : {0.5, 1.0, 2.0}) {
            for (int n : {1, 2, 5, 11}) {
                const double lhs = std::lgamma(alpha + n + 0.0) - std::lgamma(n + 1.0) -
                                   std::lgamma(alpha + 0.0) + alpha * std::log(beta) -
                                   (alpha + n) * std::log(beta + 1.0);
                const double binom = std::lgamma(alpha + n + 0.0) - std::lgamma(n + 1.0) -
                                     std::lgamma(alpha + 0.0);
                const double rhs = binom + alpha * std::log(beta / (beta + 1.0)) -
                                   n * std::log(beta + 1.0);
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("evidence: quadrature oracle for the rate marginal") {
    Eigen::RowVectorXd H = Eigen::RowVectorXd::Zero(3);
    H(0) = 1.0;
    Rng rng(11);
    for (double alpha : {1.0, 10.0}) {
        for (double beta : {0.5, 2.0}) {
            for (int n : {1, 3, 9}) {
                GGIWParams prior = test::default_ggiw();
                prior.alpha = alpha;
                prior.beta = beta;
                auto W = test::cluster_at(rng, Eigen::VectorXd::Zero(2), n);
                const GGIWUpdate up = update_ggiw(prior, W, H);
                const double oracle = eta_gamma_quadrature(alpha, beta, n);
                CHECK(std::exp(up.log_eta_gamma) == doctest::Approx(oracle).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("misdetection evidence") {
    GGIWParams p = test::default_ggiw();
    CHECK(log_evidence_misdetect(p, 0.8, true) == doctest::Approx(std::log(0.2)).epsilon(1e-12));
    CHECK(log_evidence_misdetect(p, 0.0, true) == doctest::Approx(0.0));
    CHECK(log_evidence_misdetect(p, 0.0, false) == doctest::Approx(0.0));
    CHECK(log_evidence_misdetect(p, 0.8, false) ==
          doctest::Approx(std::log(0.20078125)).epsilon(1e-12));
    CHECK(log_evidence_misdetect(p, 1.0, true) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("extent point estimate") {
    GGIWParams p = test::default_ggiw();  // d=2, v=10, V=100 I
    bool degraded = true;
    Eigen::MatrixXd est = extent_point_estimate(p, &degraded);
    CHECK_FALSE(degraded);
    CHECK(est(0, 0) == doctest::Approx(25.0));

    GGIWParams q;
    q.alpha = q.beta = 1.0;
    q.m = Eigen::VectorXd::Zero(1);
    q.P = Eigen::MatrixXd::Identity(1, 1);
    q.v = 5.0;
    q.V = Eigen::MatrixXd::Constant(1, 1, 2.0);
    est = extent_point_estimate(q, &degraded);
    CHECK_FALSE(degraded);
    CHECK(est(0, 0) == doctest::Approx(2.0));

    p.v = 6.01;
    p.V = Eigen::MatrixXd::Identity(2, 2);
    est = extent_point_estimate(p, &degraded);
    CHECK_FALSE(degraded);
    CHECK(est(0, 0) == doctest::Approx(100.0).epsilon(1e-9));

    p.v = 5.5;  // below 2d+2: fall back to the mode
    est = extent_point_estimate(p, &degraded);
    CHECK(degraded);
    CHECK(est(0, 0) == doctest::Approx(1.0 / 5.5));
}

TEST_CASE("mixture reduction") {
    const GGIWParams base = test::default_ggiw();
    MixtureReductionConfig cfg;

    SUBCASE("single component is unchanged") {
        GGIWMixture mix = GGIWMixture::single(base);
        const GGIWMixture red = reduce_mixture(mix, cfg);
        CHECK(red.size() == 1);
        CHECK(red.components[0].weight == doctest::Approx(1.0));
        CHECK((red.components[0].params.m - base.m).norm() == doctest::Approx(0.0));
    }

    SUBCASE("pruning renormalizes") {
        GGIWMixture mix;
        GGIWParams far = base;
        far.m(0) = 1e6;
        mix.components.push_back({0.999, base});
        mix.components.push_back({0.001, far});
        cfg.prune_threshold = 0.01;
        const GGIWMixture red = reduce_mixture(mix, cfg);
        CHECK(red.size() == 1);
        CHECK(red.components[0].weight == doctest::Approx(1.0));
    }

    SUBCASE("identical components merge and preserve moments") {
        GGIWMixture mix;
        mix.components.push_back({0.5, base});
        mix.components.push_back({0.5, base});
        const GGIWMixture red = reduce_mixture(mix, cfg);
        REQUIRE(red.size() == 1);
        CHECK(red.components[0].weight == doctest::Approx(1.0));
        CHECK((red.components[0].params.m - base.m).norm() <= 1e-12);
        CHECK((red.components[0].params.P - base.P).norm() <= 1e-12);
        CHECK(red.components[0].params.alpha == doctest::Approx(base.alpha));
        CHECK(red.components[0].params.v == doctest::Approx(base.v));
    }

    SUBCASE("all pruned keeps the heaviest") {
        GGIWMixture mix;
        GGIWParams far = base;
        far.m(0) = 1e6;
        mix.components.push_back({0.6, base});
        mix.components.push_back({0.4, far});
        cfg.prune_threshold = 0.9;
        const GGIWMixture red = reduce_mixture(mix, cfg);
        REQUIRE(red.size() == 1);
        CHECK(red.components[0].params.m(0) == doctest::Approx(0.0));
    }

    SUBCASE("cap keeps the heaviest components") {
        GGIWMixture mix;
        for (int i = 0; i < 20; ++i) {
            GGIWParams p = base;
            p.m(0) = 1e4 * i;  // far apart: no merging
            mix.components.push_back({(i + 1.0) / 210.0, p});
        }
        cfg.prune_threshold = 0.0;
        cfg.max_components = 10;
        const GGIWMixture red = reduce_mixture(mix, cfg);
        CHECK(red.size() == 10);
        double sum = 0.0;
        for (const auto& c : red.components) sum += c.weight;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("mixture update matches the single-component update") {
    Rng rng(5);
    Eigen::RowVectorXd H = Eigen::RowVectorXd::Zero(3);
    H(0) = 1.0;
    const GGIWParams prior = test::default_ggiw();
    auto W = test::cluster_at(rng, Eigen::VectorXd::Zero(2), 4);

    const GGIWUpdate single = update_ggiw(prior, W, H);
    const MixtureUpdate mixed = update_mixture(GGIWMixture::single(prior), W, H);
    CHECK(mixed.log_evidence == doctest::Approx(single.log_evidence).epsilon(1e-12));
    CHECK((mixed.posterior.components[0].params.m - single.posterior.m).norm() <= 1e-12);
}
