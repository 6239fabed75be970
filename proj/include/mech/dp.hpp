#pragma once

#include <vector>

#include "mech/priors.hpp"

namespace mech {

enum class Objective { consumers, welfare };

struct Discretization {
    int H = 200;          // money axis step 1/H
    int u_levels = 0;     // utility grid size for the literal 3-D DP (0 = unused)
    Objective objective = Objective::welfare;
    int threads = 1;
    int l_cap = 0;        // lower-bound axis cap for the upper-bound DP (0 = H)
};

struct DPResult {
    double value = 0.0;
    std::vector<double> policy;
};

// Optimal unanimous mechanism B(n,0,1). The additive utility axis is
// eliminated algebraically; the returned policy is the arg-max share vector.
DPResult optimal_unanimous(const Prior& prior, int n, const Discretization& disc);

// Literal 3-D B(k,u,m) on a discretized utility axis; kept for validating the
// collapsed recursion at small H.
double optimal_unanimous_literal(const Prior& prior, int n, const Discretization& disc);

// G(t): best total objective of t agents splitting cost 1.
double welfare_partition(const Prior& prior, int t, int H,
                         Objective objective = Objective::welfare);

// U(n,n,1,0): upper bound on expected objective over largest unanimous
// mechanisms for the excludable model.
double excludable_upper_bound(const Prior& prior, int n, const Discretization& disc);

// Optimal one-by-one take-it-or-leave-it offers; the objective counts only
// when the full cost 1 is raised by the end.
DPResult one_directional_offers(const Prior& prior, int n, int H,
                                Objective objective = Objective::welfare);

}  // namespace mech
