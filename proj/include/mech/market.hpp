#pragma once

#include <cstdint>

#include "mech/evolve.hpp"

namespace mech {

struct MarketTypes {
    double theta_o = 0.0;  // offender parameter, U(0,400) in the experiment
    double theta_d = 0.0;  // defender parameter, U(0,15)
};

// Exploit value accrued by the offender while holding it on [0, t_end].
double offender_value(double theta_o, double t_end);

// Defender value from patching at t_end, over [t_end, 1].
double defender_value(double theta_d, double t_end);

struct AMASpec {
    double u_defender = 1.0;  // offender weight fixed at 1
    Curve a;                  // outcome-dependent offset a(t)
    int k = 1000;             // outcome grid {0, 1/k, ..., 1}

    bool valid() const { return u_defender > 0.0 && k >= 1; }
};

struct MarketOutcome {
    double t_end = 0.0;
    double p_offender = 0.0;
    double p_defender = 0.0;
};

// Affine maximizer: o* = argmax v_O(o) + u_D v_D(o) + a(o) over the grid
// (ties toward smaller t), VCG-style payments against a.
MarketOutcome ama_outcome(const MarketTypes& types, const AMASpec& spec);

// argmax of the experiment's virtual surplus (2 theta_O - 400)(t - t^2/2) +
// (2 theta_D - 15)(1 - t) on a fine grid.
double optimal_allocation(const MarketTypes& types, int grid = 1000);

struct RevenueEstimate {
    double mean = 0.0;
    double stderror = 0.0;
};

// Monte Carlo revenue of the optimal mechanism; payments by the Myerson
// threshold-integral rule (trapezoid over the own-type axis).
RevenueEstimate optimal_revenue(size_t samples, int grid, uint64_t seed, int threads = 1,
                                int integral_points = 400);

RevenueEstimate ama_expected_revenue(const AMASpec& spec, size_t samples, uint64_t seed,
                                     int threads = 1);

struct CurveGAResult {
    Curve best;
    double revenue = 0.0;  // held-out expected revenue of `best`
    std::vector<std::pair<double, double>> trace;
};

// Ch.6 Algorithm 1: evolutionary search over curves a(t) maximizing expected
// AMA revenue (u_defender fixed to 1).
CurveGAResult evolve_market_curve(Curve::Kind kind, size_t coef_count, const GAConfig& config,
                                  int fitness_grid = 100, int heldout_grid = 1000);

}  // namespace mech
