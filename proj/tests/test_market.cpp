#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mech/market.hpp"
#include "mech/rng.hpp"

using namespace mech;

namespace {

Curve zero_curve() {
    Curve c;
    c.kind = Curve::Kind::Polynomial;
    c.coef = {0.0};
    return c;
}

}  // namespace

TEST_CASE("value functions match the closed forms") {
    CHECK(offender_value(400.0, 1.0) == doctest::Approx(200.0));
    CHECK(offender_value(400.0, 0.5) == doctest::Approx(150.0));
    CHECK(offender_value(123.0, 0.0) == doctest::Approx(0.0));
    CHECK(defender_value(15.0, 0.0) == doctest::Approx(7.5));
    CHECK(defender_value(15.0, 0.5) == doctest::Approx(5.625));
    CHECK(defender_value(15.0, 1.0) == doctest::Approx(0.0));
    CHECK_THROWS(offender_value(1.0, 1.5));
    CHECK_THROWS(defender_value(1.0, -0.1));
}

TEST_CASE("AMA with a == 0 recovers VCG on the grid") {
    AMASpec spec;
    spec.a = zero_curve();
    // Interior optimum t* = theta_O / (theta_O + theta_D); payments
    // p_O = theta_D t*^2 / 2, p_D = theta_O (1-t*)^2 / 2.
    spec.k = 100000;
    const MarketTypes types{300.0, 100.0};
    const auto out = ama_outcome(types, spec);
    const double t_star = 300.0 / 400.0;
    CHECK(out.t_end == doctest::Approx(t_star).epsilon(1e-4));
    CHECK(out.p_offender == doctest::Approx(100.0 * t_star * t_star / 2.0).epsilon(1e-4));
    CHECK(out.p_defender == doctest::Approx(300.0 * 0.25 * 0.25 / 2.0).epsilon(1e-4));

    // Coarse-grid hand example: theta = (400, 15) picks t = 1 on {0, 1/2, 1},
    // and the offender pays the defender's forgone best of 7.5.
    spec.k = 2;
    const auto coarse = ama_outcome(MarketTypes{400.0, 15.0}, spec);
    CHECK(coarse.t_end == doctest::Approx(1.0));
    CHECK(coarse.p_offender == doctest::Approx(7.5));
    CHECK(coarse.p_defender == doctest::Approx(0.0));
}

TEST_CASE("AMA payments are nonnegative and truthful reporting is optimal") {
    AMASpec spec;
    spec.a.kind = Curve::Kind::Polynomial;
    spec.a.coef = {5.0, -20.0, 12.0};
    spec.k = 400;
    spec.u_defender = 1.3;
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const MarketTypes types{rng.uniform() * 400.0, rng.uniform() * 15.0};
        const auto truthful = ama_outcome(types, spec);
        CHECK(truthful.p_offender >= -1e-9);
        CHECK(truthful.p_defender >= -1e-9);
        const double u_off =
            offender_value(types.theta_o, truthful.t_end) - truthful.p_offender;
        const double u_def =
            defender_value(types.theta_d, truthful.t_end) - truthful.p_defender;
        CHECK(u_off >= -1e-9);
        CHECK(u_def >= -1e-9);
        for (int dev = 0; dev < 8; ++dev) {
            MarketTypes lie = types;
            if (dev % 2 == 0)
                lie.theta_o = rng.uniform() * 400.0;
            else
                lie.theta_d = rng.uniform() * 15.0;
            const auto other = ama_outcome(lie, spec);
            if (dev % 2 == 0) {
                const double u_lie =
                    offender_value(types.theta_o, other.t_end) - other.p_offender;
                CHECK(u_off >= u_lie - 1e-6);
            } else {
                const double u_lie =
                    defender_value(types.theta_d, other.t_end) - other.p_defender;
                CHECK(u_def >= u_lie - 1e-6);
            }
        }
    }
}

TEST_CASE("optimal allocation corners and monotonicity") {
    // Virtual surplus (2 theta_O - 400)(t - t^2/2) + (2 theta_D - 15)(1 - t^2)/2.
    CHECK(optimal_allocation(MarketTypes{400.0, 0.0}) == doctest::Approx(1.0));
    CHECK(optimal_allocation(MarketTypes{0.0, 15.0}) == doctest::Approx(0.0));
    // Both virtual values negative: never allocate.
    CHECK(optimal_allocation(MarketTypes{100.0, 5.0}) == doctest::Approx(0.0));
    // Interior: the objective's derivative vo(1-t) - vd vanishes at
    // t* = 1 - vd/vo with vo = 2*300-400 = 200, vd = 2*10-15 = 5.
    CHECK(optimal_allocation(MarketTypes{300.0, 10.0}, 100000) ==
          doctest::Approx(1.0 - 5.0 / 200.0).epsilon(1e-4));

    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const double to = rng.uniform() * 380.0;
        const double td = rng.uniform() * 15.0;
        const double base = optimal_allocation(MarketTypes{to, td});
        CHECK(optimal_allocation(MarketTypes{to + 20.0, td}) >= base - 1e-12);
        if (td >= 1.0)
            CHECK(optimal_allocation(MarketTypes{to, td - 1.0}) >= base - 1e-12);
    }
}

TEST_CASE("optimal revenue beats VCG revenue") {
    const auto opt = optimal_revenue(20000, 1000, 99, 4);
    AMASpec vcg;
    vcg.a = zero_curve();
    const auto plain = ama_expected_revenue(vcg, 20000, 99, 4);
    CHECK(opt.mean > plain.mean + 3.0 * (opt.stderror + plain.stderror));
    CHECK(opt.stderror > 0.0);
    CHECK(opt.stderror < 1.0);
}

TEST_CASE("expected revenue estimates are deterministic in the seed") {
    AMASpec spec;
    spec.a.kind = Curve::Kind::Polynomial;
    spec.a.coef = {2.0, -6.0};
    const auto a = ama_expected_revenue(spec, 4000, 7, 2);
    const auto b = ama_expected_revenue(spec, 4000, 7, 2);
    CHECK(a.mean == b.mean);
    CHECK(a.stderror == b.stderror);
    const auto c = ama_expected_revenue(spec, 4000, 8, 2);
    CHECK(a.mean != c.mean);
}

TEST_CASE("curve GA improves on the zero curve") {
    GAConfig cfg;
    cfg.population = 16;
    cfg.elite = 6;
    cfg.rounds = 8;
    cfg.fitness_profiles = 400;
    cfg.heldout = 4000;
    cfg.threads = 4;
    cfg.seed = 5;
    const auto result = evolve_market_curve(Curve::Kind::Polynomial, 3, cfg, 50, 200);
    AMASpec vcg;
    vcg.a = zero_curve();
    const auto plain = ama_expected_revenue(vcg, 4000, cfg.seed * 31 + 7, 4);
    CHECK(result.revenue > plain.mean);
    CHECK(result.trace.size() == cfg.rounds);
}
