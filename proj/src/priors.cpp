#include "mech/priors.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace mech {

namespace {

double simpson(const std::function<double(double)>& f, double a, double m, double b,
               double fa, double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double std_normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double logistic_cdf(double x, double mu, double s) {
    return 1.0 / (1.0 + std::exp(-(x - mu) / s));
}

double logistic_pdf(double x, double mu, double s) {
    const double e = std::exp(-(x - mu) / s);
    return e / (s * (1.0 + e) * (1.0 + e));
}

// Regularized incomplete beta I_x(a,b) via Lentz's continued fraction.
double betacf(double a, double b, double x) {
    const double eps = 3e-14, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

double beta_inc(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lnbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - lnbeta);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a >= b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

Prior::Prior(Family f, std::array<double, 5> par, double lo, double hi)
    : family_(f), par_(par), lo_(lo), hi_(hi) {
    if (!(lo < hi) && f != Family::TwoPoint)
        throw std::invalid_argument("prior support must be a nondegenerate interval");
    switch (family_) {
        case Family::TruncatedNormal:
            norm_ = std_normal_cdf((hi_ - par_[0]) / par_[1]) -
                    std_normal_cdf((lo_ - par_[0]) / par_[1]);
            break;
        case Family::TruncatedExponential:
            norm_ = std::exp(-par_[0] * lo_) - std::exp(-par_[0] * hi_);
            break;
        case Family::TruncatedLogistic:
            norm_ = logistic_cdf(hi_, par_[0], par_[1]) - logistic_cdf(lo_, par_[0], par_[1]);
            break;
        default:
            norm_ = 1.0;
    }
    if (norm_ <= 0.0) throw std::invalid_argument("truncated prior has zero mass on support");
}

Prior Prior::uniform(double lo, double hi) { return Prior(Family::Uniform, {}, lo, hi); }

Prior Prior::truncated_normal(double mu, double sigma, double lo, double hi) {
    return Prior(Family::TruncatedNormal, {mu, sigma}, lo, hi);
}

Prior Prior::truncated_exponential(double lambda, double lo, double hi) {
    return Prior(Family::TruncatedExponential, {lambda}, lo, hi);
}

Prior Prior::truncated_logistic(double mu, double s, double lo, double hi) {
    return Prior(Family::TruncatedLogistic, {mu, s}, lo, hi);
}

Prior Prior::two_peak(double mu1, double s1, double mu2, double s2, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("mixture weight outside [0,1]");
    return Prior(Family::TwoPeak, {mu1, s1, mu2, s2, p}, 0.0, 1.0);
}

Prior Prior::beta(double alpha, double b) {
    if (alpha <= 0.0 || b <= 0.0) throw std::invalid_argument("beta parameters must be positive");
    return Prior(Family::Beta, {alpha, b}, 0.0, 1.0);
}

Prior Prior::two_point(double x_lo, double x_hi, double p) {
    if (x_lo >= x_hi) throw std::invalid_argument("two-point atoms out of order");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("probability outside [0,1]");
    Prior pr(Family::TwoPoint, {x_lo, x_hi, p}, std::min(0.0, x_lo), std::max(1.0, x_hi));
    pr.lo_ = x_lo;
    pr.hi_ = x_hi;
    return pr;
}

void Prior::check_support(double x) const {
    if (x < lo_ - 1e-12 || x > hi_ + 1e-12) throw OutOfSupport(x);
}

double Prior::pdf(double x) const {
    if (discrete()) throw DiscretePrior();
    check_support(x);
    switch (family_) {
        case Family::Uniform:
            return 1.0 / (hi_ - lo_);
        case Family::TruncatedNormal:
            return std_normal_pdf((x - par_[0]) / par_[1]) / par_[1] / norm_;
        case Family::TruncatedExponential:
            return par_[0] * std::exp(-par_[0] * x) / norm_;
        case Family::TruncatedLogistic:
            return logistic_pdf(x, par_[0], par_[1]) / norm_;
        case Family::TwoPeak: {
            // Mixture of two normals, each truncated to [0,1] and renormalized.
            const double z1 = std_normal_cdf((1.0 - par_[0]) / par_[1]) -
                              std_normal_cdf((0.0 - par_[0]) / par_[1]);
            const double z2 = std_normal_cdf((1.0 - par_[2]) / par_[3]) -
                              std_normal_cdf((0.0 - par_[2]) / par_[3]);
            return par_[4] * std_normal_pdf((x - par_[0]) / par_[1]) / par_[1] / z1 +
                   (1.0 - par_[4]) * std_normal_pdf((x - par_[2]) / par_[3]) / par_[3] / z2;
        }
        case Family::Beta: {
            const double a = par_[0], b = par_[1];
            if (x <= 0.0) return a < 1.0 ? pdf(1e-12) : (a == 1.0 ? b : 0.0);
            if (x >= 1.0) return b < 1.0 ? pdf(1.0 - 1e-12) : (b == 1.0 ? a : 0.0);
            const double lnb = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
            return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x) - lnb);
        }
        case Family::TwoPoint:
            break;
    }
    throw DiscretePrior();
}

double Prior::cdf(double x) const {
    if (x <= lo_) return family_ == Family::TwoPoint && x >= par_[0] ? 1.0 - par_[2] : 0.0;
    if (x >= hi_) return 1.0;
    switch (family_) {
        case Family::Uniform:
            return (x - lo_) / (hi_ - lo_);
        case Family::TruncatedNormal:
            return (std_normal_cdf((x - par_[0]) / par_[1]) -
                    std_normal_cdf((lo_ - par_[0]) / par_[1])) / norm_;
        case Family::TruncatedExponential:
            return (std::exp(-par_[0] * lo_) - std::exp(-par_[0] * x)) / norm_;
        case Family::TruncatedLogistic:
            return (logistic_cdf(x, par_[0], par_[1]) - logistic_cdf(lo_, par_[0], par_[1])) /
                   norm_;
        case Family::TwoPeak: {
            const auto comp = [&](double mu, double s) {
                const double z = std_normal_cdf((1.0 - mu) / s) - std_normal_cdf((0.0 - mu) / s);
                return (std_normal_cdf((x - mu) / s) - std_normal_cdf((0.0 - mu) / s)) / z;
            };
            return par_[4] * comp(par_[0], par_[1]) + (1.0 - par_[4]) * comp(par_[2], par_[3]);
        }
        case Family::Beta:
            return beta_inc(par_[0], par_[1], x);
        case Family::TwoPoint:
            return 1.0 - par_[2];  // x in [x_lo, x_hi)
    }
    return 0.0;
}

double Prior::upper_mass(double x) const {
    if (!discrete()) return reliability(x);
    if (x <= par_[0]) return 1.0;
    if (x <= par_[1]) return par_[2];
    return 0.0;
}

double Prior::quantile(double u) const {
    if (u <= 0.0) return lo_;
    if (u >= 1.0) return hi_;
    switch (family_) {
        case Family::Uniform:
            return lo_ + u * (hi_ - lo_);
        case Family::TruncatedExponential: {
            const double lam = par_[0];
            return -std::log(std::exp(-lam * lo_) - u * norm_) / lam;
        }
        case Family::TruncatedLogistic: {
            const double base = logistic_cdf(lo_, par_[0], par_[1]) + u * norm_;
            return par_[0] + par_[1] * std::log(base / (1.0 - base));
        }
        case Family::TwoPoint:
            return u < 1.0 - par_[2] ? par_[0] : par_[1];
        default: {
            double a = lo_, b = hi_;
            while (b - a > 1e-10) {
                const double m = 0.5 * (a + b);
                (cdf(m) < u ? a : b) = m;
            }
            return 0.5 * (a + b);
        }
    }
}

double Prior::sample(Rng& rng) const { return quantile(rng.uniform()); }

std::vector<double> Prior::sample(Rng& rng, size_t count) const {
    std::vector<double> out(count);
    for (auto& v : out) v = sample(rng);
    return out;
}

std::vector<double> Prior::sample(uint64_t seed, size_t count) const {
    Rng rng(seed);
    return sample(rng, count);
}

double Prior::conditional_welfare(double c) const {
    check_support(c);
    if (discrete()) {
        const double plo = 1.0 - par_[2], phi = par_[2];
        double mass = 0.0, surplus = 0.0;
        if (par_[0] >= c) { mass += plo; surplus += plo * (par_[0] - c); }
        if (par_[1] >= c) { mass += phi; surplus += phi * (par_[1] - c); }
        if (mass <= 0.0) throw ZeroAcceptanceMass();
        return surplus / mass;
    }
    const double mass = reliability(c);
    if (mass <= 1e-13) {
        if (c >= hi_ - 1e-12) return 0.0;  // w is continuous with limit 0 at the top
        throw ZeroAcceptanceMass();
    }
    const double surplus = integrate([&](double x) { return (x - c) * pdf(x); }, c, hi_);
    return surplus / mass;
}

std::string Prior::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (family_) {
        case Family::Uniform: os << "uniform(" << lo_ << "," << hi_ << ")"; break;
        case Family::TruncatedNormal: os << "normal(" << par_[0] << "," << par_[1] << ")"; break;
        case Family::TruncatedExponential: os << "exponential(" << par_[0] << ")"; break;
        case Family::TruncatedLogistic: os << "logistic(" << par_[0] << "," << par_[1] << ")"; break;
        case Family::TwoPeak:
            os << "twopeak(" << par_[0] << "," << par_[1] << "," << par_[2] << "," << par_[3]
               << "," << par_[4] << ")";
            break;
        case Family::Beta: os << "beta(" << par_[0] << "," << par_[1] << ")"; break;
        case Family::TwoPoint:
            os << "twopoint(" << par_[0] << "," << par_[1] << "," << par_[2] << ")";
            break;
    }
    return os.str();
}

Prior parse_prior(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw std::invalid_argument("malformed prior: " + text);
    std::string name = text.substr(0, open);
    for (auto& ch : name) ch = static_cast<char>(std::tolower(ch));
    std::vector<double> a;
    std::string args = text.substr(open + 1, close - open - 1);
    std::istringstream is(args);
    std::string tok;
    while (std::getline(is, tok, ',')) a.push_back(std::stod(tok));
    const auto need = [&](size_t k) {
        if (a.size() != k)
            throw std::invalid_argument("prior " + name + " expects " + std::to_string(k) +
                                        " parameters");
    };
    if (name == "uniform") { need(2); return Prior::uniform(a[0], a[1]); }
    if (name == "normal" || name == "truncnormal" || name == "truncatednormal") {
        need(2);
        return Prior::truncated_normal(a[0], a[1]);
    }
    if (name == "exponential" || name == "truncatedexponential") {
        need(1);
        return Prior::truncated_exponential(a[0]);
    }
    if (name == "logistic" || name == "truncatedlogistic") {
        need(2);
        return Prior::truncated_logistic(a[0], a[1]);
    }
    if (name == "twopeak") { need(5); return Prior::two_peak(a[0], a[1], a[2], a[3], a[4]); }
    if (name == "beta") { need(2); return Prior::beta(a[0], a[1]); }
    if (name == "twopoint" || name == "bernoulli") {
        if (name == "bernoulli") { need(1); return Prior::two_point(0.0, 1.0, a[0]); }
        need(3);
        return Prior::two_point(a[0], a[1], a[2]);
    }
    throw std::invalid_argument("unknown prior family: " + name);
}

}  // namespace mech
