#include "rfse/lmb_filter.hpp"
#include "rfse/rng.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace rfse;

namespace {

LmbFilterConfig base_config() {
    LmbFilterConfig cfg;
    cfg.glmb.p_s = 0.99;
    cfg.glmb.p_d = 0.9;
    cfg.glmb.motion = MotionModel::decaying_acceleration(1.0, 1.0, 0.1);
    cfg.glmb.clutter = test::default_clutter(10.0, 1000.0);
    cfg.glmb.birth.V0 = 100.0 * Eigen::MatrixXd::Identity(2, 2);
    cfg.glmb.birth.P0 = Eigen::Vector3d(100.0, 6.25, 1.0).asDiagonal();
    return cfg;
}

LmbTrack make_track(Label label, double r, const Eigen::Vector2d& pos) {
    GGIWParams p = test::default_ggiw();
    p.m.head(2) = pos;
    return {label, r, GGIWMixture::single(p)};
}

}  // namespace

TEST_CASE("predict: survival scaling, births, collisions") {
    const MotionModel motion = MotionModel::decaying_acceleration(1.0, 1.0, 0.1);

    LmbDensity post;
    post.tracks.push_back(make_track(Label{0, 0}, 0.5, {0.0, 0.0}));

    LmbDensity empty_birth;
    const LmbDensity pred = predict_lmb(post, empty_birth, motion, 0.99);
    REQUIRE(pred.tracks.size() == 1);
    CHECK(pred.tracks[0].r == doctest::Approx(0.495).epsilon(1e-12));

    const LmbDensity unchanged = predict_lmb(post, empty_birth, motion, 1.0);
    CHECK(unchanged.tracks[0].r == doctest::Approx(0.5));

    LmbDensity birth;
    birth.tracks.push_back(make_track(Label{3, 0}, 0.03, {100.0, 0.0}));
    LmbDensity empty_post;
    const LmbDensity from_birth = predict_lmb(empty_post, birth, motion, 0.99);
    REQUIRE(from_birth.tracks.size() == 1);
    CHECK(from_birth.tracks[0].r == doctest::Approx(0.03));
    CHECK(from_birth.tracks[0].label == Label{3, 0});

    LmbDensity colliding;
    colliding.tracks.push_back(make_track(Label{0, 0}, 0.1, {50.0, 0.0}));
    CHECK_THROWS_AS(predict_lmb(post, colliding, motion, 0.99), std::invalid_argument);
}

TEST_CASE("update: independent groups update independently") {
    LmbFilterConfig cfg = base_config();
    Rng rng(80);

    LmbDensity left, right, both;
    left.tracks.push_back(make_track(Label{0, 0}, 0.8, {-400.0, 0.0}));
    right.tracks.push_back(make_track(Label{0, 1}, 0.6, {400.0, 0.0}));
    both.tracks = left.tracks;
    both.tracks.push_back(right.tracks[0]);

    auto zl = test::cluster_at(rng, Eigen::Vector2d(-400.0, 0.0), 6, 4.0);
    auto zr = test::cluster_at(rng, Eigen::Vector2d(400.0, 0.0), 5, 4.0);
    std::vector<Eigen::VectorXd> z_all = zl;
    z_all.insert(z_all.end(), zr.begin(), zr.end());

    const LmbDensity joint = update_lmb(both, z_all, cfg, 1);
    const LmbDensity only_left = update_lmb(left, zl, cfg, 1);
    const LmbDensity only_right = update_lmb(right, zr, cfg, 1);

    REQUIRE(joint.tracks.size() == 2);
    REQUIRE(only_left.tracks.size() == 1);
    REQUIRE(only_right.tracks.size() == 1);
    CHECK(joint.tracks[0].r == doctest::Approx(only_left.tracks[0].r).epsilon(1e-9));
    CHECK(joint.tracks[1].r == doctest::Approx(only_right.tracks[0].r).epsilon(1e-9));
    CHECK((joint.tracks[0].density.best().params.m - only_left.tracks[0].density.best().params.m)
              .norm() <= 1e-9);
    CHECK((joint.tracks[1].density.best().params.m - only_right.tracks[0].density.best().params.m)
              .norm() <= 1e-9);
}

TEST_CASE("update: single-track misdetection recursion in closed form") {
    LmbFilterConfig cfg = base_config();
    cfg.glmb.p_d = 0.8;
    cfg.deletion_threshold = 0.0;

    SUBCASE("r = 1 stays 1 on an empty scan") {
        LmbDensity lmb;
        lmb.tracks.push_back(make_track(Label{0, 0}, 1.0, {0.0, 0.0}));
        const LmbDensity post = update_lmb(lmb, {}, cfg, 1);
        REQUIRE(post.tracks.size() == 1);
        CHECK(post.tracks[0].r == doctest::Approx(1.0));
        CHECK((post.tracks[0].density.best().params.m -
               lmb.tracks[0].density.best().params.m)
                  .norm() <= 1e-12);
    }

    SUBCASE("r' = r q / (1 - r + r q)") {
        const double q = 0.2;
        double r = 0.99;
        LmbDensity lmb;
        lmb.tracks.push_back(make_track(Label{0, 0}, r, {0.0, 0.0}));
        for (int k = 0; k < 3; ++k) {
            lmb = update_lmb(lmb, {}, cfg, k);
            REQUIRE(lmb.tracks.size() == 1);
            const double expected = r * q / (1.0 - r + r * q);
            CHECK(lmb.tracks[0].r == doctest::Approx(expected).epsilon(1e-12));
            r = expected;
        }
        CHECK(r < 0.5);  // three misses drag existence below the report bar
    }
}

TEST_CASE("update: adaptive birth from a far residual cluster") {
    LmbFilterConfig cfg = base_config();
    cfg.adaptive_birth = true;
    Rng rng(81);

    LmbDensity lmb;
    lmb.tracks.push_back(make_track(Label{0, 0}, 0.5, {0.0, 0.0}));
    auto z = test::cluster_at(rng, Eigen::Vector2d(0.0, 0.0), 3, 4.0);
    auto far = test::cluster_at(rng, Eigen::Vector2d(600.0, 0.0), 5, 3.0);
    z.insert(z.end(), far.begin(), far.end());

    const LmbDensity post = update_lmb(lmb, z, cfg, 4);
    REQUIRE(post.tracks.size() == 2);
    CHECK(post.tracks[0].label == Label{0, 0});
    CHECK(post.tracks[1].label == Label{4, 0});
    CHECK(post.tracks[1].r == doctest::Approx(std::min(0.1, 5.0 / 10.0)));
    CHECK((post.tracks[1].density.best().params.m.head(2) -
           Eigen::Vector2d(600.0, 0.0))
              .norm() < 10.0);
}

TEST_CASE("update: deletion threshold removes dying tracks") {
    LmbFilterConfig cfg = base_config();
    cfg.glmb.p_d = 0.9;
    cfg.deletion_threshold = 1e-3;
    LmbDensity lmb;
    lmb.tracks.push_back(make_track(Label{0, 0}, 0.02, {0.0, 0.0}));
    LmbDensity post = update_lmb(lmb, {}, cfg, 1);
    CHECK(post.tracks.empty());
}

TEST_CASE("step: steady target is reported from the second step on") {
    LmbFilterConfig cfg = base_config();
    cfg.glmb.p_d = 0.98;
    cfg.glmb.birth.sites.push_back({Eigen::VectorXd::Zero(6), 0.03});
    Rng rng(82);

    LmbFilterState state;
    int first_report = -1;
    for (int k = 0; k < 8; ++k) {
        const auto est = step_lmb(state, test::cluster_at(rng, Eigen::Vector2d(0.0, 0.0), 9, 4.0), cfg);
        if (!est.empty() && first_report < 0) first_report = k;
        if (k >= 2) {
            REQUIRE(est.size() == 1);
            CHECK(est[0].r > 0.5);
        }
    }
    CHECK(first_report <= 2);

    // all r stay within [0,1]
    for (const auto& t : state.density.tracks) {
        CHECK(t.r >= 0.0);
        CHECK(t.r <= 1.0);
    }
}

TEST_CASE("step: pure clutter with no birth model yields nothing") {
    LmbFilterConfig cfg = base_config();  // no birth sites, no adaptive birth
    Rng rng(83);
    LmbFilterState state;
    for (int k = 0; k < 6; ++k) {
        std::vector<Eigen::VectorXd> z;
        for (int i = 0; i < 10; ++i)
            z.push_back(Eigen::Vector2d(rng.uniform(-900.0, 900.0), rng.uniform(-900.0, 900.0)));
        CHECK(step_lmb(state, z, cfg).empty());
    }
    CHECK(state.density.tracks.empty());
}

TEST_CASE("expected cardinality carries through the group conversion") {
    LmbFilterConfig cfg = base_config();
    Rng rng(84);
    LmbDensity lmb;
    lmb.tracks.push_back(make_track(Label{0, 0}, 0.7, {-300.0, 0.0}));
    lmb.tracks.push_back(make_track(Label{0, 1}, 0.4, {300.0, 0.0}));

    // conversion alone (no measurements): existence decays by the misdetect
    // odds but stays consistent with the underlying GLMB per group
    const GlmbDensity g = lmb_to_glmb(lmb);
    CHECK(g.expected_cardinality() == doctest::Approx(1.1).epsilon(1e-9));
    const LmbDensity back = glmb_to_lmb(g, cfg.glmb.reduction);
    CHECK(back.expected_cardinality() == doctest::Approx(1.1).epsilon(1e-9));
}
