#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mech/redist.hpp"

using namespace mech;

namespace {

// h identically equal to a constant, built on the knot grid.
RedistributionFn constant_h(size_t n, double value) {
    const size_t knots = 8;
    std::vector<double> grid(knots * knots, value);
    return RedistributionFn(n, FeatureCombo::combo1, knots, std::move(grid));
}

}  // namespace

TEST_CASE("first best") {
    CHECK(first_best(TypeProfile({0.2, 0.3})) == 1.0);
    CHECK(first_best(TypeProfile({0.5, 0.5, 0.5})) == 1.5);
    CHECK(first_best(TypeProfile({0.0, 0.0})) == 1.0);
}

TEST_CASE("feature combinations") {
    CHECK(features({0.9, 0.4, 0.1}, FeatureCombo::combo8) ==
          std::vector<double>{0.9, 0.1, 0.5});
    const auto c7 = features({0.9, 0.4, 0.1}, FeatureCombo::combo7);
    CHECK(c7[0] == doctest::Approx(0.9));
    CHECK(c7[1] == doctest::Approx(0.5));
    CHECK(c7[2] == doctest::Approx(0.5));  // jump 0.9 - 0.4
    CHECK(features({0.3}, FeatureCombo::combo1) == std::vector<double>{0.3, 0.0});
    // Input order is irrelevant (sorted internally).
    CHECK(features({0.1, 0.9, 0.4}, FeatureCombo::combo8) ==
          features({0.9, 0.4, 0.1}, FeatureCombo::combo8));
}

TEST_CASE("redistribution outcome formulas") {
    const auto h2 = constant_h(3, 2.0);
    const auto out = redist_outcome(TypeProfile({0.5, 0.5, 0.5}), h2);
    CHECK(out.built);
    for (double r : out.receive) CHECK(r == doctest::Approx(-1.0));
    CHECK(out.welfare == doctest::Approx(-1.5));
    CHECK(out.ratio == doctest::Approx(-1.0));

    const auto h23 = constant_h(3, 2.0 / 3.0);
    const auto low = redist_outcome(TypeProfile({0.1, 0.1, 0.1}), h23);
    CHECK_FALSE(low.built);
    for (double r : low.receive) CHECK(r == doctest::Approx(0.0));
    CHECK(low.welfare == doctest::Approx(1.0));
    CHECK(low.ratio == doctest::Approx(1.0));
}

TEST_CASE("welfare recomputed from utilities matches n S - sum h") {
    Rng rng(42);
    const Prior u = Prior::uniform(0, 1);
    const auto h = RedistributionFn::baseline(3, FeatureCombo::combo1, 8);
    for (int trial = 0; trial < 2000; ++trial) {
        const TypeProfile profile(u.sample(rng, 3));
        const auto out = redist_outcome(profile, h);
        double total = 0.0;
        for (double v : out.utilities) total += v;
        REQUIRE(total == doctest::Approx(out.welfare).epsilon(1e-9));
        REQUIRE(out.ratio == doctest::Approx(3.0 - feasibility_ratio(profile, h)).epsilon(1e-9));
    }
}

TEST_CASE("structural strategy-proofness: h never sees the own report") {
    Rng rng(7);
    const Prior u = Prior::uniform(0, 1);
    const auto h = RedistributionFn::baseline(4, FeatureCombo::combo8, 8);
    for (int trial = 0; trial < 1000; ++trial) {
        const TypeProfile profile(u.sample(rng, 4));
        const size_t agent = rng.below(4);
        const TypeProfile deviated = profile.with(agent, rng.uniform());
        std::vector<double> before, after;
        for (size_t j = 0; j < 4; ++j) {
            if (j == agent) continue;
            before.push_back(profile[j]);
            after.push_back(deviated[j]);
        }
        REQUIRE(h(before) == h(after));  // bit-identical h term
    }
    // Permutation invariance: anonymous features permute transfers.
    const auto out_a = redist_outcome(TypeProfile({0.2, 0.7, 0.9, 0.4}), h);
    const auto out_b = redist_outcome(TypeProfile({0.9, 0.4, 0.2, 0.7}), h);
    CHECK(out_a.receive[1] == doctest::Approx(out_b.receive[3]).epsilon(1e-12));
    CHECK(out_a.receive[2] == doctest::Approx(out_b.receive[0]).epsilon(1e-12));
}

TEST_CASE("feasibility of the constant h = n-1") {
    const auto h = constant_h(3, 2.0);
    const Prior u = Prior::uniform(0, 1);
    CHECK(is_feasible(h, u, 20000, 42).violations == 0);  // sum h / S = 6/S >= 2
    // Worst ratio at S=1: alpha = 3 - 6 = -3.
    const auto wc = worst_case_ratio(h, 4000, 42);
    CHECK(wc.alpha == doctest::Approx(-3.0).epsilon(1e-6));
}

TEST_CASE("constant h = (n-1)/n runs a deficit for larger S") {
    const auto h = constant_h(3, 2.0 / 3.0);
    const auto wc = worst_case_ratio(h, 4000, 42);
    CHECK(wc.worst_deficit < 0.0);
    const auto report = is_feasible(h, Prior::uniform(0, 1), 20000, 42);
    CHECK(report.violations > 0);
}

TEST_CASE("baseline h is feasible everywhere") {
    for (size_t n : {3u, 5u}) {
        const auto h = RedistributionFn::baseline(n, FeatureCombo::combo1, 8);
        CHECK(is_feasible(h, Prior::uniform(0, 1), 50000, 42).violations == 0);
        const auto wc = worst_case_ratio(h, 4000, 42);
        CHECK(wc.worst_deficit >= -1e-9);
    }
}

TEST_CASE("expected ratio terms") {
    const auto h = constant_h(3, 2.0);
    const auto mc = expected_ratio_terms(h, Prior::uniform(0, 1), 50000, 42);
    // E[6 / max(T,1)] with T Irwin-Hall(3): strictly above 2 and below 6.
    CHECK(mc.mean > 2.0);
    CHECK(mc.mean < 6.0);
    CHECK(mc.stderror < 0.02);
}

TEST_CASE("degenerate GA returns the seeded baseline") {
    GAConfig ga;
    ga.population = 1;
    ga.elite = 1;
    ga.rounds = 0;
    ga.heldout = 100;
    ga.fitness_profiles = 10;
    const auto h = optimize_h(RedistObjective::expectation, Prior::uniform(0, 1), 3, ga);
    const auto base = RedistributionFn::baseline(3, FeatureCombo::combo1, 8);
    // Post-certification may lift the surface by a constant only.
    const double delta = h.values()[0] - base.values()[0];
    for (size_t i = 0; i < h.values().size(); ++i)
        CHECK(h.values()[i] - base.values()[i] == doctest::Approx(delta).epsilon(1e-9));
}

TEST_CASE("adversary finds a corner violation that random sampling misses") {
    // Feasible everywhere except near theta = (1,1,1): carve a deficit into
    // the top knot corner.
    // A fine grid and a small carve keep the violating region tiny (it needs
    // two values within ~1/255 of 1 and the third above ~0.955), so uniform
    // sampling is very unlikely to land in it.
    auto h = RedistributionFn::baseline(3, FeatureCombo::combo1, 256);
    h.values().back() -= 0.03;  // knot at features (max=1, rest=1)
    const auto random_scan = is_feasible(h, Prior::uniform(0, 1), 100000, 4242);
    const auto wc = worst_case_ratio(h, 4000, 42);
    CHECK(wc.worst_deficit < -1e-6);       // adversary (corner scan) finds it
    CHECK(random_scan.violations == 0);    // 1e5 random profiles do not
}

