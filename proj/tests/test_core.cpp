#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mech/core.hpp"
#include "mech/costshare.hpp"

using namespace mech;

namespace {

// Deliberately manipulable: consumers are charged their own report.
BinaryOutcome pay_your_bid(const TypeProfile& profile) {
    BinaryOutcome out;
    const size_t n = profile.n();
    out.payments.assign(n, 0.0);
    double total = 0.0;
    for (double v : profile.values) total += v;
    if (total < 1.0) return out;
    out.built = true;
    out.consumers.assign(n, true);
    for (size_t i = 0; i < n; ++i) out.payments[i] = profile[i] / total;
    return out;
}

// Always builds and splits the cost equally: IR fails for low values.
BinaryOutcome always_build(const TypeProfile& profile) {
    const size_t n = profile.n();
    BinaryOutcome out;
    out.built = true;
    out.consumers.assign(n, true);
    out.payments.assign(n, 1.0 / static_cast<double>(n));
    return out;
}

}  // namespace

TEST_CASE("serial cost sharing is strategy-proof under sampling") {
    const Prior u = Prior::uniform(0, 1);
    const auto report = check_sp(binary_utility(serial_cost_sharing), u, 5, 10000, 1e-9, 42);
    CHECK(report.ok());
    CHECK(report.max_gain == 0.0);
}

TEST_CASE("exhaustive misreport grid confirms SCS strategy-proofness at n=2") {
    for (int a = 0; a <= 100; ++a) {
        for (int b = 0; b <= 100; ++b) {
            const TypeProfile truth({a / 100.0, b / 100.0});
            const auto honest = serial_cost_sharing(truth);
            const double u0 =
                (honest.consumes(0) ? truth[0] : 0.0) - (honest.built ? honest.payments[0] : 0.0);
            for (int lie = 0; lie <= 100; ++lie) {
                const auto dev = serial_cost_sharing(truth.with(0, lie / 100.0));
                const double u1 =
                    (dev.consumes(0) ? truth[0] : 0.0) - (dev.built ? dev.payments[0] : 0.0);
                REQUIRE(u1 <= u0 + 1e-12);
            }
        }
    }
}

TEST_CASE("a broken mechanism is caught") {
    const Prior u = Prior::uniform(0, 1);
    const auto report = check_sp(binary_utility(pay_your_bid), u, 3, 10000, 1e-9, 7);
    CHECK_FALSE(report.ok());
    CHECK(report.max_gain > 0.0);
}

TEST_CASE("ir check") {
    const Prior u = Prior::uniform(0, 1);
    CHECK(check_ir(binary_utility(conservative_equal_cost), u, 3, 10000, 1e-9, 42).ok());
    const auto bad = check_ir(binary_utility(always_build), u, 3, 10000, 1e-9, 42);
    CHECK_FALSE(bad.ok());
}

TEST_CASE("budget check") {
    const Prior u = Prior::uniform(0, 1);
    CHECK(check_budget(BinaryMechanism(serial_cost_sharing), u, 4, 10000, 42).ok());
    // With one agent the always-build mechanism charges exactly 1: balanced.
    CHECK(check_budget(BinaryMechanism(always_build), u, 1, 10, 42).ok());
    // A mechanism paying only 0.9 in total is flagged.
    const BinaryMechanism short_pay = [](const TypeProfile& profile) {
        BinaryOutcome out = always_build(profile);
        out.payments.back() -= 0.1;
        return out;
    };
    CHECK_FALSE(check_budget(short_pay, u, 3, 100, 42).ok());
}

TEST_CASE("checkers are deterministic given the seed") {
    const Prior u = Prior::uniform(0, 1);
    const auto a = check_sp(binary_utility(pay_your_bid), u, 3, 500, 1e-9, 99);
    const auto b = check_sp(binary_utility(pay_your_bid), u, 3, 500, 1e-9, 99);
    REQUIRE(a.violations.size() == b.violations.size());
    for (size_t i = 0; i < a.violations.size(); ++i) {
        CHECK(a.violations[i].trial == b.violations[i].trial);
        CHECK(a.violations[i].gain == b.violations[i].gain);
    }
    const auto single = check_sp(binary_utility(serial_cost_sharing), u, 3, 1, 1e-9, 5);
    CHECK(single.trials == 1);
}

TEST_CASE("violation report serializes to csv") {
    const Prior u = Prior::uniform(0, 1);
    const auto report = check_sp(binary_utility(pay_your_bid), u, 3, 2000, 1e-9, 7);
    const std::string csv = report.to_csv();
    CHECK(csv.rfind("trial,agent,true_value,misreport,gain\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(report.violations.size()) + 1);
}
