#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mech/costshare.hpp"
#include "mech/dp.hpp"

using namespace mech;

namespace {

double monte_carlo_value(const BinaryMechanism& mech, const Prior& prior, size_t n,
                         Objective objective, size_t samples, uint64_t seed) {
    Rng rng(seed);
    double total = 0.0;
    for (size_t t = 0; t < samples; ++t) {
        const TypeProfile profile(prior.sample(rng, n));
        const BinaryOutcome out = mech(profile);
        if (!out.built) continue;
        for (size_t i = 0; i < n; ++i) {
            if (!out.consumers[i]) continue;
            total += objective == Objective::consumers ? 1.0 : profile[i] - out.payments[i];
        }
    }
    return total / static_cast<double>(samples);
}

}  // namespace

TEST_CASE("optimal unanimous: uniform closed form") {
    Discretization disc;
    disc.H = 300;
    disc.objective = Objective::consumers;
    const auto result = optimal_unanimous(Prior::uniform(0, 1), 3, disc);
    // Equal shares are optimal; value n(1-1/n)^n.
    CHECK(result.value == doctest::Approx(3.0 * 8.0 / 27.0).epsilon(1e-3));
    REQUIRE(result.policy.size() == 3);
    double total = 0.0;
    for (double c : result.policy) {
        CHECK(c == doctest::Approx(1.0 / 3).epsilon(0.02));
        total += c;
    }
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("optimal unanimous matches an independent fixed-grid oracle") {
    // Oracle: the same recursion executed by a reference implementation at
    // H=40 for the two-peak prior, n=2.
    Discretization disc;
    disc.H = 40;
    const Prior tp = Prior::two_peak(0.1, 0.1, 0.9, 0.1, 0.5);
    disc.objective = Objective::welfare;
    CHECK(optimal_unanimous(tp, 2, disc).value == doctest::Approx(0.1856208507194644).epsilon(1e-9));
    disc.objective = Objective::consumers;
    CHECK(optimal_unanimous(tp, 2, disc).value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("collapsed recursion agrees with the literal 3-D DP") {
    Discretization disc;
    disc.H = 50;
    disc.u_levels = 4000;
    const Prior tp = Prior::two_peak(0.1, 0.1, 0.9, 0.1, 0.5);
    for (Objective obj : {Objective::consumers, Objective::welfare}) {
        disc.objective = obj;
        const double collapsed = optimal_unanimous(tp, 3, disc).value;
        const double literal = optimal_unanimous_literal(tp, 3, disc);
        CHECK(collapsed == doctest::Approx(literal).epsilon(2e-3));
    }
}

TEST_CASE("grid refinement changes the value only slightly") {
    const Prior tp = Prior::two_peak(0.1, 0.1, 0.9, 0.1, 0.5);
    Discretization coarse, fine;
    coarse.H = 100;
    fine.H = 200;
    const double lo = optimal_unanimous(tp, 3, coarse).value;
    const double hi = optimal_unanimous(tp, 3, fine).value;
    CHECK(hi >= lo - 1.0 / coarse.H);
}

TEST_CASE("optimal unanimous dominates the CEC feasible point") {
    const Prior tp = Prior::two_peak(0.1, 0.1, 0.9, 0.1, 0.5);
    Discretization disc;
    disc.H = 100;
    disc.objective = Objective::consumers;
    const double dp = optimal_unanimous(tp, 3, disc).value;
    const double cec = monte_carlo_value(conservative_equal_cost, tp, 3,
                                         Objective::consumers, 20000, 42);
    CHECK(dp >= cec - 0.02);
}

TEST_CASE("welfare partition") {
    const Prior u = Prior::uniform(0, 1);
    CHECK(welfare_partition(u, 1, 100) == doctest::Approx(0.0).epsilon(1e-9));
    // Equal split is optimal by concavity: t*(1-1/t)/2.
    CHECK(welfare_partition(u, 4, 100) == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(welfare_partition(u, 7, 50, Objective::consumers) == 7.0);
}

TEST_CASE("excludable upper bound reproduces the fixed-grid oracle") {
    Discretization disc;
    disc.H = 25;
    disc.objective = Objective::consumers;
    const Prior u = Prior::uniform(0, 1);
    CHECK(excludable_upper_bound(u, 3, disc) == doctest::Approx(1.42036992).epsilon(1e-9));
    disc.objective = Objective::welfare;
    CHECK(excludable_upper_bound(u, 3, disc) == doctest::Approx(0.42907648).epsilon(1e-9));
}

TEST_CASE("extending the lower-bound axis cap does not change the value") {
    Discretization base, wide;
    base.H = wide.H = 30;
    base.objective = wide.objective = Objective::consumers;
    wide.l_cap = 90;
    const Prior u = Prior::uniform(0, 1);
    CHECK(excludable_upper_bound(u, 4, base) ==
          doctest::Approx(excludable_upper_bound(u, 4, wide)).epsilon(1e-12));
}

TEST_CASE("upper bound dominates serial cost sharing") {
    Discretization disc;
    disc.H = 60;
    disc.threads = 2;
    for (const Prior& prior : {Prior::uniform(0, 1), Prior::truncated_normal(0.5, 0.1)}) {
        for (Objective obj : {Objective::consumers, Objective::welfare}) {
            disc.objective = obj;
            const double ub = excludable_upper_bound(prior, 4, disc);
            const double scs = monte_carlo_value(serial_cost_sharing, prior, 4, obj, 20000, 42);
            CHECK(ub >= scs - 0.02);
        }
    }
}

TEST_CASE("one-directional offers") {
    const Prior u = Prior::uniform(0, 1);
    // Single agent: the forced offer is the full cost and rel(1)=0.
    CHECK(one_directional_offers(u, 1, 50, Objective::consumers).value ==
          doctest::Approx(0.0));
    const Prior bern = Prior::two_point(0.0, 1.0, 0.5);
    CHECK(one_directional_offers(bern, 1, 50, Objective::consumers).value ==
          doctest::Approx(0.5));
    // "Ask 1 until someone pays, rest free": sum over the first acceptor
    // position j of 2^-j (n - j + 1); exhaustive-enumeration oracle for n=5.
    double oracle = 0.0;
    for (int j = 1; j <= 5; ++j) oracle += std::pow(0.5, j) * (5 - j + 1);
    CHECK(one_directional_offers(bern, 5, 50, Objective::consumers).value ==
          doctest::Approx(oracle).epsilon(1e-9));
    // Dominated by the excludable upper bound.
    Discretization disc;
    disc.H = 40;
    disc.objective = Objective::consumers;
    CHECK(one_directional_offers(u, 3, 40, Objective::consumers).value <=
          excludable_upper_bound(u, 3, disc) + 1e-9);
}
