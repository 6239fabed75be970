#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mech/rng.hpp"

namespace mech {

struct OutOfSupport : std::runtime_error {
    explicit OutOfSupport(double x)
        : std::runtime_error("value " + std::to_string(x) + " outside the prior's support") {}
};

struct DiscretePrior : std::runtime_error {
    DiscretePrior() : std::runtime_error("density undefined for a discrete prior") {}
};

struct ZeroAcceptanceMass : std::runtime_error {
    ZeroAcceptanceMass() : std::runtime_error("no probability mass at or above the cost share") {}
};

// Adaptive Simpson quadrature, absolute tolerance `tol`.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-8);

// Valuation prior on a closed interval (default [0,1]). Truncated families are
// renormalized so the mass on the support is exactly 1.
class Prior {
public:
    enum class Family {
        Uniform,
        TruncatedNormal,
        TruncatedExponential,
        TruncatedLogistic,
        TwoPeak,
        Beta,
        TwoPoint,
    };

    static Prior uniform(double lo = 0.0, double hi = 1.0);
    static Prior truncated_normal(double mu, double sigma, double lo = 0.0, double hi = 1.0);
    static Prior truncated_exponential(double lambda, double lo = 0.0, double hi = 1.0);
    static Prior truncated_logistic(double mu, double s, double lo = 0.0, double hi = 1.0);
    static Prior two_peak(double mu1, double s1, double mu2, double s2, double p);
    static Prior beta(double alpha, double b);
    // Mass 1-p at x_lo, p at x_hi.
    static Prior two_point(double x_lo, double x_hi, double p);

    Family family() const { return family_; }
    bool discrete() const { return family_ == Family::TwoPoint; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::array<double, 5>& params() const { return par_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double reliability(double x) const { return 1.0 - cdf(x); }

    // P(X >= x). Equal to reliability for continuous families; includes the
    // atom at x for the discrete one (acceptance is "value >= share").
    double upper_mass(double x) const;

    // Inverse CDF: closed form where available, bisection to 1e-10 otherwise.
    double quantile(double u) const;

    double sample(Rng& rng) const;
    std::vector<double> sample(Rng& rng, size_t count) const;
    std::vector<double> sample(uint64_t seed, size_t count) const;

    // w(c): expected utility of an agent facing cost share c, conditional on
    // acceptance (value >= c).
    double conditional_welfare(double c) const;

    std::string describe() const;

private:
    Prior(Family f, std::array<double, 5> par, double lo, double hi);
    void check_support(double x) const;

    Family family_;
    std::array<double, 5> par_{};
    double lo_ = 0.0, hi_ = 1.0;
    double norm_ = 1.0;  // mass of the untruncated density on [lo, hi]
};

// Parse "uniform(0,1)", "twopeak(0.1,0.1,0.9,0.1,0.5)", "twopoint(0,1,0.5)", ...
Prior parse_prior(const std::string& text);

}  // namespace mech
