#pragma once

#include <array>
#include <vector>

#include "mech/core.hpp"
#include "mech/evolve.hpp"

namespace mech {

enum class FeatureCombo {
    identity,  // sorted theta_{-i} itself
    combo1,    // (max, sum of rest)
    combo7,    // (max, sum of rest, largest adjacent jump)
    combo8,    // (max, min, sum of rest)
};

// Extract features from theta_{-i}; the list is sorted descending internally.
std::vector<double> features(std::vector<double> theta_minus_i, FeatureCombo combo);

// h(theta_{-i}) = multilinear interpolation of a knot grid over the feature
// box. Structural SP holds by construction: the value never sees theta_i.
class RedistributionFn {
public:
    RedistributionFn(size_t n, FeatureCombo combo, size_t knots_per_axis,
                     std::vector<double> knot_values);

    // The trivially feasible baseline h = (n-1)/n * (sum theta_{-i} + 1),
    // encoded exactly on the grid (it is linear in the features).
    static RedistributionFn baseline(size_t n, FeatureCombo combo, size_t knots_per_axis);

    size_t n() const { return n_; }
    FeatureCombo combo() const { return combo_; }
    size_t knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& axis_hi() const { return axis_hi_; }

    double operator()(const std::vector<double>& theta_minus_i) const;

    std::string to_csv() const;

private:
    size_t n_;
    FeatureCombo combo_;
    size_t knots_;
    size_t dims_;
    std::vector<double> axis_hi_;   // feature upper bounds (lower bounds are 0)
    std::vector<double> values_;    // dense knots^dims grid, row-major
};

struct RedistOutcome {
    bool built = false;
    std::vector<double> receive;    // per-agent transfer
    std::vector<double> utilities;
    double welfare = 0.0;           // n*S - sum h
    double ratio = 0.0;             // n - sum h / S
};

// S(theta) = max{sum theta, 1}.
double first_best(const TypeProfile& profile);

RedistOutcome redist_outcome(const TypeProfile& profile, const RedistributionFn& h);

double feasibility_ratio(const TypeProfile& profile, const RedistributionFn& h);  // sum h / S

struct FeasibilityReport {
    size_t profiles = 0;
    size_t violations = 0;
    double worst_slack = 0.0;       // most negative sum h - (n-1) S observed
    TypeProfile witness;
};

// Weak budget balance sum h >= (n-1) S on sampled profiles.
FeasibilityReport is_feasible(const RedistributionFn& h, const Prior& prior, size_t profiles,
                              uint64_t seed);

struct WorstCase {
    double alpha = 0.0;             // minimal observed ratio n - sum h / S
    TypeProfile witness;
    double worst_deficit = 0.0;     // most negative sum h - (n-1) S found
    TypeProfile deficit_witness;
};

// Evolutionary adversary over profiles in [0,1]^n plus an exhaustive scan of
// the corner set {0, 1/n, 1}^n.
WorstCase worst_case_ratio(const RedistributionFn& h, size_t budget, uint64_t seed);

struct MonteCarloMean {
    double mean = 0.0;
    double stderror = 0.0;
};

MonteCarloMean expected_ratio_terms(const RedistributionFn& h, const Prior& prior, size_t samples,
                                    uint64_t seed);

enum class RedistObjective { worst_case, expectation };

RedistributionFn optimize_h(RedistObjective objective, const Prior& prior, size_t n,
                            const GAConfig& ga, FeatureCombo combo = FeatureCombo::combo1);

}  // namespace mech
