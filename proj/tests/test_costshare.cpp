#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mech/costshare.hpp"

using namespace mech;

TEST_CASE("conservative equal cost") {
    auto out = conservative_equal_cost(TypeProfile({0.6, 0.7}));
    CHECK(out.built);
    CHECK(out.payments == std::vector<double>{0.5, 0.5});
    CHECK_FALSE(conservative_equal_cost(TypeProfile({0.4, 0.9})).built);
    out = conservative_equal_cost(TypeProfile({1.0 / 3, 1.0 / 3, 1.0 / 3}));
    CHECK(out.built);  // boundary acceptance
    CHECK(out.payments[2] == doctest::Approx(1.0 / 3));
}

TEST_CASE("unanimous mechanism") {
    const CostShareVector v{{0.3, 0.7}};
    CHECK_FALSE(unanimous(TypeProfile({0.35, 0.65}), v).built);
    CHECK(unanimous(TypeProfile({0.3, 0.7}), v).built);
    CHECK_FALSE(unanimous(TypeProfile({0.9, 0.0}), CostShareVector{{1.0, 0.0}}).built);
    CHECK_THROWS_AS(unanimous(TypeProfile({0.5, 0.5}), CostShareVector{{0.3, 0.3}}), InvalidShares);
}

TEST_CASE("coalition feasibility I and K") {
    auto f = coalition_feasibility({0.6, 0.6, 0.1});
    CHECK(f.I == 1);
    CHECK(f.K == 2);
    f = coalition_feasibility({0.2, 0.3});
    CHECK(f.I == 0);
    CHECK(f.K == 0);
    f = coalition_feasibility({1.0});
    CHECK(f.I == 1);
    CHECK(f.K == 1);
}

TEST_CASE("serial cost sharing") {
    auto out = serial_cost_sharing(TypeProfile({0.6, 0.6, 0.1}));
    CHECK(out.built);
    CHECK(out.consumers == std::vector<bool>{true, true, false});
    CHECK(out.payments[0] == doctest::Approx(0.5));
    CHECK(out.payments[2] == 0.0);
    CHECK_FALSE(serial_cost_sharing(TypeProfile({0.2, 0.3})).built);
    out = serial_cost_sharing(TypeProfile({1.0, 1.0, 1.0}));
    CHECK(out.consumers == std::vector<bool>{true, true, true});
    CHECK(out.payments[1] == doctest::Approx(1.0 / 3));
    // K = 2: both 0.5-values accept the half share, the 0.2 agent is out.
    out = serial_cost_sharing(TypeProfile({0.5, 0.2, 0.5}));
    CHECK(out.consumers == std::vector<bool>{true, false, true});
    CHECK(out.payments[0] == doctest::Approx(0.5));
}

TEST_CASE("largest unanimous with the equal-share table equals SCS") {
    const auto spec = CostShareSpec::equal_shares(3);
    auto out = largest_unanimous(TypeProfile({0.6, 0.6, 0.1}), spec);
    CHECK(out.consumers == std::vector<bool>{true, true, false});
    CHECK(out.payments[0] == doctest::Approx(0.5));

    Rng rng(42);
    for (size_t n = 2; n <= 8; ++n) {
        const auto table = CostShareSpec::equal_shares(n);
        const Prior u = Prior::uniform(0, 1);
        for (int trial = 0; trial < 10000 / static_cast<int>(n); ++trial) {
            const TypeProfile profile(u.sample(rng, n));
            const auto scs = serial_cost_sharing(profile);
            const auto lu = largest_unanimous(profile, table);
            REQUIRE(scs.built == lu.built);
            REQUIRE(scs.payments == lu.payments);
        }
    }
}

TEST_CASE("largest unanimous corner cases") {
    std::vector<CostShareVector> table(1u << 2);
    table[0b01].shares = {1.0, 0.0};
    table[0b10].shares = {0.0, 1.0};
    table[0b11].shares = {1.0, 0.0};  // grand coalition: agent 1 pays all
    const CostShareSpec spec(2, table);
    const auto out = largest_unanimous(TypeProfile({1.0, 0.0}), spec);
    CHECK(out.built);
    CHECK(out.payments == std::vector<double>{1.0, 0.0});
    CHECK_FALSE(largest_unanimous(TypeProfile({0.0, 0.0}), CostShareSpec::equal_shares(2)).built);
}

TEST_CASE("validate_spec flags dropped shares") {
    CHECK(validate_spec(CostShareSpec::equal_shares(3)).empty());
    // Agent 0's share drops from 1/3 to 0.2 when agent 2 leaves.
    auto table = std::vector<CostShareVector>(1u << 3);
    for (uint32_t c = 1; c < table.size(); ++c)
        table[c] = CostShareSpec::equal_shares(3).at(c);
    table[0b011].shares = {0.2, 0.8, 0.0};
    const CostShareSpec spec(3, table);
    CHECK_FALSE(spec.monotone());
    const auto violations = validate_spec(spec);
    REQUIRE_FALSE(violations.empty());
    CHECK(violations.front().agent == 0);
    CHECK_THROWS_AS(largest_unanimous(TypeProfile({0.5, 0.5, 0.5}), spec), InvalidSpec);
    // n=1 single-coalition table.
    std::vector<CostShareVector> one(2);
    one[1].shares = {1.0};
    CHECK(validate_spec(CostShareSpec(1, one)).empty());
}

TEST_CASE("construction rejects malformed tables") {
    std::vector<CostShareVector> table(1u << 2);
    table[0b01].shares = {0.9, 0.0};  // does not sum to 1
    table[0b10].shares = {0.0, 1.0};
    table[0b11].shares = {0.5, 0.5};
    CHECK_THROWS_AS(CostShareSpec(2, table), InvalidSpec);
}

TEST_CASE("monotone response: raising a consumer's value keeps her consuming") {
    Rng rng(11);
    const Prior u = Prior::uniform(0, 1);
    const auto spec = CostShareSpec::equal_shares(4);
    for (int trial = 0; trial < 2000; ++trial) {
        TypeProfile profile(u.sample(rng, 4));
        const auto before = largest_unanimous(profile, spec);
        for (size_t i = 0; i < 4; ++i) {
            if (!before.consumes(i)) continue;
            const auto after = largest_unanimous(profile.with(i, 1.0), spec);
            REQUIRE(after.consumes(i));
        }
    }
}

TEST_CASE("spec table serialization round-trips") {
    const auto spec = CostShareSpec::equal_shares(3);
    const auto copy = CostShareSpec::deserialize(spec.serialize());
    CHECK(copy.n() == 3);
    for (uint32_t c = 1; c < (1u << 3); ++c) CHECK(copy.at(c).shares == spec.at(c).shares);
}
