#pragma once

#include <string>
#include <vector>

#include "mech/core.hpp"

namespace mech {

struct DelayOutcome {
    bool built = false;
    std::vector<double> release_times;  // all 1 when not built
    std::vector<double> payments;       // all 0 when not built
};

// One stage of a sequential unanimous mechanism. T_i = 1 is allowed only with
// B_i = 0 (the vector excludes agent i).
struct CostTimeVector {
    std::vector<double> T;
    std::vector<double> B;

    bool valid() const;
    // Unit price B_i / (1 - T_i); an excluded agent faces price +infinity.
    double unit_price(size_t i) const;
    // v >= price, with the convention that B_i = 0 is always acceptable.
    bool accepts(size_t i, double v) const;
};

struct SequentialMechanism {
    std::vector<CostTimeVector> sequence;

    bool valid() const;
    std::string to_csv(char sep = ',') const;
};

DelayOutcome single_deadline(const TypeProfile& profile, double d);

DelayOutcome multiple_deadline(const TypeProfile& profile, const std::vector<double>& deadlines);

DelayOutcome sequential_unanimous(const TypeProfile& profile, const SequentialMechanism& mech);

// Nondecreasing unit price and release time per agent along the sequence;
// implies strategy-proofness.
bool strict_filter(const SequentialMechanism& mech);

// Simulation-based strategy-proofness test (one random misreport per agent
// per profile).
bool loose_filter(const SequentialMechanism& mech, const Prior& prior, size_t profiles,
                  uint64_t seed);

struct DelayObjectives {
    double max_delay = 0.0;
    double sum_delay = 0.0;
};

DelayObjectives delay_objectives(const DelayOutcome& outcome);

// Monte Carlo expected (max, sum) delay of an arbitrary delay mechanism.
DelayObjectives expected_delay(const std::function<DelayOutcome(const TypeProfile&)>& mech,
                               const Prior& prior, size_t n, size_t samples, uint64_t seed,
                               int threads = 1);

// Closed form 1 - (P(v >= 1/n))^n.
double scs_expected_max_delay(const Prior& prior, size_t n);

// r(o) = F(o) / (o * (1 - F(o))); r(0) = f(0).
double payment_ratio(const Prior& prior, double o);

struct OptimalRatio {
    double r_star = 0.0;
    double o_star = 0.0;
};

// Grid search (1e4 points) refined by golden section on [0, 1 - 1e-6].
OptimalRatio optimal_ratio(const Prior& prior);

// d = (1 + eps) / (n * o* * P(v > o*)), with o* = 0 replaced by 1e-3 and the
// result clamped into (0, 1].
double asymptotic_single_deadline(const Prior& prior, size_t n, double eps);

UtilityFn delay_utility(std::function<DelayOutcome(const TypeProfile&)> mech);

}  // namespace mech
