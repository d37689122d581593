#include "rfse/labelled_rfs.hpp"
#include "rfse/rng.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace rfse;

namespace {

GlmbDensity two_component_density(double lw0, double lw1) {
    GlmbDensity g;
    g.table.push_back({Label{0, 0}, GGIWMixture::single(test::default_ggiw())});
    g.components.push_back({lw0, {}});
    g.components.push_back({lw1, {0}});
    return g;
}

}  // namespace

TEST_CASE("label ordering and serialization") {
    CHECK(Label{1, 2}.str() == "1.2");
    CHECK(Label::parse("3.14") == Label{3, 14});
    CHECK(Label{0, 1} < Label{1, 0});
    CHECK(Label{1, 0} < Label{1, 1});
    CHECK_THROWS_AS(Label::parse("nodot"), std::invalid_argument);
}

TEST_CASE("normalize: symmetry, singletons and minus-infinity weights") {
    GlmbDensity g = two_component_density(3.0, 3.0);
    g = normalize_glmb(std::move(g));
    CHECK(std::exp(g.components[0].log_weight) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::exp(g.components[1].log_weight) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.cardinality[0] == doctest::Approx(0.5));
    CHECK(g.cardinality[1] == doctest::Approx(0.5));
    g.check_invariants();

    GlmbDensity single;
    single.components.push_back({-7.0, {}});
    single = normalize_glmb(std::move(single));
    CHECK(std::exp(single.components[0].log_weight) == doctest::Approx(1.0));

    GlmbDensity degenerate = two_component_density(0.0, -std::numeric_limits<double>::infinity());
    degenerate = normalize_glmb(std::move(degenerate));
    CHECK(std::exp(degenerate.components[0].log_weight) == doctest::Approx(1.0));
    CHECK(std::exp(degenerate.components[1].log_weight) == doctest::Approx(0.0));

    GlmbDensity empty;
    empty.components.push_back({-std::numeric_limits<double>::infinity(), {}});
    CHECK_THROWS_AS(normalize_glmb(std::move(empty)), EmptyPosterior);
}

TEST_CASE("prune: top components kept and renormalized") {
    GlmbDensity g;
    g.table.push_back({Label{0, 0}, GGIWMixture::single(test::default_ggiw())});
    g.table.push_back({Label{0, 1}, GGIWMixture::single(test::default_ggiw())});
    g.components.push_back({std::log(0.7), {0}});
    g.components.push_back({std::log(0.2), {1}});
    g.components.push_back({std::log(0.1), {0, 1}});
    g = normalize_glmb(std::move(g));

    const GlmbDensity unchanged = prune_glmb(g, 10);
    CHECK(unchanged.components.size() == 3);

    const GlmbDensity top2 = prune_glmb(g, 2);
    REQUIRE(top2.components.size() == 2);
    CHECK(std::exp(top2.components[0].log_weight) == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
    CHECK(std::exp(top2.components[1].log_weight) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));

    const GlmbDensity top1 = prune_glmb(g, 1);
    REQUIRE(top1.components.size() == 1);
    CHECK(std::exp(top1.components[0].log_weight) == doctest::Approx(1.0));
    CHECK(top1.table.size() == 1);  // unreferenced tracks dropped
}

TEST_CASE("estimate extraction follows MAP cardinality") {
    SUBCASE("mass peaked at zero yields no estimates") {
        GlmbDensity g = two_component_density(std::log(0.9), std::log(0.1));
        g = normalize_glmb(std::move(g));
        CHECK(extract_estimates(g).empty());
    }

    SUBCASE("single component reports all tracks") {
        GlmbDensity g;
        g.table.push_back({Label{0, 0}, GGIWMixture::single(test::default_ggiw())});
        g.table.push_back({Label{1, 0}, GGIWMixture::single(test::default_ggiw())});
        g.components.push_back({0.0, {0, 1}});
        g = normalize_glmb(std::move(g));
        const auto est = extract_estimates(g);
        REQUIRE(est.size() == 2);
        CHECK(est[0].label == Label{0, 0});
        CHECK(est[1].label == Label{1, 0});
        CHECK(est[0].rate == doctest::Approx(10.0));
        CHECK(est[0].extent(0, 0) == doctest::Approx(25.0));
    }

    SUBCASE("cardinality mass beats the heaviest component") {
        GlmbDensity g;
        g.table.push_back({Label{0, 0}, GGIWMixture::single(test::default_ggiw())});  // a
        g.table.push_back({Label{0, 1}, GGIWMixture::single(test::default_ggiw())});  // b
        g.components.push_back({std::log(0.3), {0}});
        g.components.push_back({std::log(0.3), {1}});
        g.components.push_back({std::log(0.4), {}});
        g = normalize_glmb(std::move(g));
        const auto est = extract_estimates(g);
        REQUIRE(est.size() == 1);
        CHECK(est[0].label == Label{0, 0});  // tie broken by label order
    }
}

TEST_CASE("lmb_to_glmb: product-form weights") {
    SUBCASE("one track, r = 1/2") {
        LmbDensity lmb;
        lmb.tracks.push_back({Label{0, 0}, 0.5, GGIWMixture::single(test::default_ggiw())});
        const GlmbDensity g = lmb_to_glmb(lmb);
        REQUIRE(g.components.size() == 2);
        CHECK(std::exp(g.components[0].log_weight) == doctest::Approx(0.5));
        CHECK(std::exp(g.components[1].log_weight) == doctest::Approx(0.5));
    }

    SUBCASE("two tracks, each r = 1/2: four equal components") {
        LmbDensity lmb;
        lmb.tracks.push_back({Label{0, 0}, 0.5, GGIWMixture::single(test::default_ggiw())});
        lmb.tracks.push_back({Label{0, 1}, 0.5, GGIWMixture::single(test::default_ggiw())});
        const GlmbDensity g = lmb_to_glmb(lmb);
        REQUIRE(g.components.size() == 4);
        for (const auto& c : g.components)
            CHECK(std::exp(c.log_weight) == doctest::Approx(0.25).epsilon(1e-12));
    }

    SUBCASE("certain existence puts no mass on the empty set") {
        LmbDensity lmb;
        lmb.tracks.push_back({Label{0, 0}, 1.0, GGIWMixture::single(test::default_ggiw())});
        const GlmbDensity g = lmb_to_glmb(lmb);
        REQUIRE(g.components.size() == 2);
        CHECK(std::exp(g.components[0].log_weight) == doctest::Approx(0.0));
        CHECK(std::exp(g.components[1].log_weight) == doctest::Approx(1.0));
    }

    SUBCASE("weights match direct subset evaluation up to n = 4") {
        Rng rng(8);
        for (int n = 1; n <= 4; ++n) {
            LmbDensity lmb;
            std::vector<double> rs;
            for (int i = 0; i < n; ++i) {
                const double r = rng.uniform(0.05, 0.95);
                rs.push_back(r);
                lmb.tracks.push_back({Label{0, i}, r, GGIWMixture::single(test::default_ggiw())});
            }
            const GlmbDensity g = lmb_to_glmb(lmb);
            REQUIRE(g.components.size() == (std::size_t{1} << n));
            for (const auto& c : g.components) {
                double expected = 1.0;
                std::vector<bool> in(n, false);
                for (int t : c.tracks) in[t] = true;
                for (int i = 0; i < n; ++i) expected *= in[i] ? rs[i] : 1.0 - rs[i];
                CHECK(std::exp(c.log_weight) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }

    SUBCASE("cap guards the enumeration") {
        LmbDensity lmb;
        for (int i = 0; i < 5; ++i)
            lmb.tracks.push_back({Label{0, i}, 0.5, GGIWMixture::single(test::default_ggiw())});
        CHECK_THROWS_AS(lmb_to_glmb(lmb, 4), std::invalid_argument);
    }
}

TEST_CASE("glmb_to_lmb: existence sums and round trips") {
    MixtureReductionConfig reduction;

    SUBCASE("single certain component") {
        GlmbDensity g;
        g.table.push_back({Label{0, 0}, GGIWMixture::single(test::default_ggiw())});
        g.components.push_back({0.0, {0}});
        g = normalize_glmb(std::move(g));
        const LmbDensity lmb = glmb_to_lmb(g, reduction);
        REQUIRE(lmb.tracks.size() == 1);
        CHECK(lmb.tracks[0].r == doctest::Approx(1.0));
        CHECK((lmb.tracks[0].density.components[0].params.m - test::default_ggiw().m).norm() <=
              1e-12);
    }

    SUBCASE("existence is the summed weight of including components") {
        GlmbDensity g = two_component_density(std::log(0.4), std::log(0.6));
        g = normalize_glmb(std::move(g));
        const LmbDensity lmb = glmb_to_lmb(g, reduction);
        REQUIRE(lmb.tracks.size() == 1);
        CHECK(lmb.tracks[0].r == doctest::Approx(0.6).epsilon(1e-12));
    }

    SUBCASE("round trip recovers existence probabilities") {
        Rng rng(17);
        LmbDensity lmb;
        for (int i = 0; i < 4; ++i) {
            GGIWParams p = test::default_ggiw();
            p.m(0) = 1000.0 * i;
            lmb.tracks.push_back({Label{0, i}, rng.uniform(0.1, 0.9), GGIWMixture::single(p)});
        }
        const LmbDensity back = glmb_to_lmb(lmb_to_glmb(lmb), reduction);
        REQUIRE(back.tracks.size() == 4);
        for (int i = 0; i < 4; ++i)
            CHECK(back.tracks[i].r == doctest::Approx(lmb.tracks[i].r).epsilon(1e-12));
    }

    SUBCASE("expected cardinality is preserved") {
        Rng rng(18);
        LmbDensity lmb;
        for (int i = 0; i < 4; ++i) {
            GGIWParams p = test::default_ggiw();
            p.m(0) = 500.0 * i;
            lmb.tracks.push_back({Label{0, i}, rng.uniform(0.1, 0.9), GGIWMixture::single(p)});
        }
        const GlmbDensity g = lmb_to_glmb(lmb);
        const LmbDensity back = glmb_to_lmb(g, reduction);
        CHECK(back.expected_cardinality() ==
              doctest::Approx(g.expected_cardinality()).epsilon(1e-9));
    }
}
