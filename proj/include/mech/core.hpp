#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mech/priors.hpp"

namespace mech {

struct TypeProfile {
    std::vector<double> values;

    TypeProfile() = default;
    explicit TypeProfile(std::vector<double> v) : values(std::move(v)) {}
    size_t n() const { return values.size(); }
    double operator[](size_t i) const { return values[i]; }

    // Profile with agent i's report replaced.
    TypeProfile with(size_t i, double v) const {
        TypeProfile out = *this;
        out.values[i] = v;
        return out;
    }
};

struct BinaryOutcome {
    bool built = false;
    std::vector<bool> consumers;      // empty when not built
    std::vector<double> payments;     // all zero when not built

    bool consumes(size_t i) const { return built && consumers[i]; }
};

struct Violation {
    size_t trial = 0;
    size_t agent = 0;
    double true_value = 0.0;
    double misreport = 0.0;
    double gain = 0.0;
    TypeProfile profile;
};

struct PropertyReport {
    size_t trials = 0;
    std::vector<Violation> violations;
    double max_gain = 0.0;

    bool ok() const { return violations.empty(); }
    std::string to_csv() const;
};

// Utility of `agent` with true type `true_value` when `reported` is the joint
// report. Adapters below cover the binary and delay utility models.
using UtilityFn = std::function<double(const TypeProfile& reported, size_t agent, double true_value)>;

using BinaryMechanism = std::function<BinaryOutcome(const TypeProfile&)>;

UtilityFn binary_utility(BinaryMechanism mech);

// One sampled misreport per trial, drawn from the prior or one of the two
// support endpoints (endpoints are frequent best deviations).
PropertyReport check_sp(const UtilityFn& utility, const Prior& prior, size_t n, size_t trials,
                        double tolerance, uint64_t seed);

PropertyReport check_ir(const UtilityFn& utility, const Prior& prior, size_t n, size_t trials,
                        double tolerance, uint64_t seed);

// Verifies the BinaryOutcome invariants on sampled profiles.
PropertyReport check_budget(const BinaryMechanism& mech, const Prior& prior, size_t n,
                            size_t trials, uint64_t seed);

// Budget check under a caller-supplied predicate (delay / redistribution models).
PropertyReport check_budget(const std::function<bool(const TypeProfile&)>& predicate,
                            const Prior& prior, size_t n, size_t trials, uint64_t seed);

}  // namespace mech
