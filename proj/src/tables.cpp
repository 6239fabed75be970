#include "mech/tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "mech/costshare.hpp"
#include "mech/delay.hpp"
#include "mech/dp.hpp"
#include "mech/evolve.hpp"
#include "mech/market.hpp"
#include "mech/redist.hpp"
#include "mech/rng.hpp"

namespace mech::tables {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.8g", v);
    return buf;
}

uint64_t config_hash(const std::string& name, const PresetOptions& opt) {
    // FNV-1a over the fields that can change the output.
    const std::string key = name + "|" + std::to_string(opt.seed) + "|" + fmt(opt.scale) + "|" +
                            std::to_string(opt.threads);
    uint64_t h = 1469598103934665603ull;
    for (const char c : key) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string header(const std::string& name, const PresetOptions& opt) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# config=%016llx,seed=%llu\n",
                  static_cast<unsigned long long>(config_hash(name, opt)),
                  static_cast<unsigned long long>(opt.seed));
    return buf;
}

size_t scaled(double base, double scale, size_t floor_at) {
    return std::max(static_cast<size_t>(base * scale), floor_at);
}

// Monte Carlo mean/stderr of a binary mechanism's objective.
struct McStat {
    double mean = 0.0;
    double stderror = 0.0;
};

McStat mc_binary(const BinaryMechanism& mech, const Prior& prior, size_t n, Objective objective,
                 size_t samples, uint64_t seed) {
    Rng rng(seed);
    double sum = 0.0, sumsq = 0.0;
    for (size_t s = 0; s < samples; ++s) {
        const TypeProfile profile(prior.sample(rng, n));
        const BinaryOutcome out = mech(profile);
        double v = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (!out.consumes(i)) continue;
            v += objective == Objective::consumers ? 1.0 : profile[i] - out.payments[i];
        }
        sum += v;
        sumsq += v * v;
    }
    McStat st;
    st.mean = sum / static_cast<double>(samples);
    const double var = std::max(0.0, sumsq / samples - st.mean * st.mean);
    st.stderror = std::sqrt(var / static_cast<double>(samples));
    return st;
}

std::string ch3_twopeak(const PresetOptions& opt) {
    const Prior prior = Prior::two_peak(0.1, 0.1, 0.9, 0.1, 0.5);
    std::ostringstream out;
    out << header("ch3-twopeak", opt);
    out << "n,solver,objective,value,stderr\n";
    const size_t samples = scaled(1e5, opt.scale, 1000);
    for (const int n : {3, 5}) {
        Discretization disc;
        disc.H = static_cast<int>(scaled(200, opt.scale, 40));
        disc.threads = opt.threads;
        for (const Objective objective : {Objective::consumers, Objective::welfare}) {
            disc.objective = objective;
            const char* tag = objective == Objective::consumers ? "consumers" : "welfare";
            out << n << ",dp," << tag << "," << fmt(optimal_unanimous(prior, n, disc).value)
                << ",0\n";
            const McStat cec =
                mc_binary(conservative_equal_cost, prior, n, objective, samples, opt.seed);
            out << n << ",cec," << tag << "," << fmt(cec.mean) << "," << fmt(cec.stderror)
                << "\n";
        }
    }
    return out.str();
}

std::string ch3_ub(const PresetOptions& opt) {
    std::ostringstream out;
    out << header("ch3-ub", opt);
    out << "prior,n,objective,scs_mean,scs_stderr,ub\n";
    const std::vector<std::pair<std::string, int>> rows = {
        {"uniform(0,1)", 5}, {"uniform(0,1)", 10}, {"truncnormal(0.5,0.1)", 5}};
    const size_t samples = scaled(2e5, opt.scale, 1000);
    for (const auto& [spec, n] : rows) {
        const Prior prior = parse_prior(spec);
        Discretization disc;
        disc.H = static_cast<int>(scaled(200, opt.scale, 25));
        disc.threads = opt.threads;
        for (const Objective objective : {Objective::consumers, Objective::welfare}) {
            disc.objective = objective;
            const McStat scs =
                mc_binary(serial_cost_sharing, prior, n, objective, samples, opt.seed);
            out << spec << "," << n << ","
                << (objective == Objective::consumers ? "consumers" : "welfare") << ","
                << fmt(scs.mean) << "," << fmt(scs.stderror) << ","
                << fmt(excludable_upper_bound(prior, n, disc)) << "\n";
        }
    }
    return out.str();
}

std::string ch4_delays(const PresetOptions& opt) {
    std::ostringstream out;
    out << header("ch4-delays", opt);
    out << "prior,mechanism,sum_delay,max_delay\n";
    const size_t n = 3;
    const size_t samples = scaled(2e5, opt.scale, 1000);
    const std::vector<std::string> priors = {"uniform(0,1)", "bernoulli(0.5)"};
    for (const auto& spec : priors) {
        const Prior prior = parse_prior(spec);
        const auto row = [&](const std::string& tag,
                             const std::function<DelayOutcome(const TypeProfile&)>& mech) {
            const DelayObjectives obj =
                expected_delay(mech, prior, n, samples, opt.seed, opt.threads);
            out << spec << "," << tag << "," << fmt(obj.sum_delay) << "," << fmt(obj.max_delay)
                << "\n";
        };
        row("scs", [](const TypeProfile& p) { return single_deadline(p, 1.0); });
        row("deadline(0.5)", [](const TypeProfile& p) { return single_deadline(p, 0.5); });
        row("multiple(1,1,0.5)", [](const TypeProfile& p) {
            return multiple_deadline(p, {1.0, 1.0, 0.5});
        });
        GAConfig ga;
        ga.population = 40;
        ga.elite = 12;
        ga.rounds = static_cast<int>(scaled(200, opt.scale, 4));
        ga.fitness_profiles = 200;
        ga.mutation_prob = 0.9;
        ga.heldout = static_cast<int>(scaled(1e4, opt.scale, 500));
        ga.threads = opt.threads;
        ga.seed = opt.seed;
        const SequenceGAResult tga = evolve_sequences(prior, n, ga, /*strict=*/true);
        out << spec << ",tga," << fmt(tga.sum_delay) << ",nan\n";
    }
    return out.str();
}

std::string ch5_expectation(const PresetOptions& opt) {
    std::ostringstream out;
    out << header("ch5-expectation", opt);
    out << "combo,expected_ratio,stderr,feasible,worst_deficit\n";
    const Prior prior = Prior::uniform(0, 1);
    const size_t n = 3;
    GAConfig ga;
    ga.population = 60;
    ga.elite = 20;
    ga.rounds = static_cast<int>(scaled(150, opt.scale, 3));
    ga.fitness_profiles = static_cast<int>(scaled(2000, opt.scale, 200));
    ga.threads = opt.threads;
    ga.seed = opt.seed;
    const std::vector<std::pair<std::string, FeatureCombo>> combos = {
        {"combo1", FeatureCombo::combo1}, {"combo8", FeatureCombo::combo8}};
    for (const auto& [tag, combo] : combos) {
        const RedistributionFn h = optimize_h(RedistObjective::expectation, prior, n, ga, combo);
        const MonteCarloMean ratio =
            expected_ratio_terms(h, prior, scaled(1e5, opt.scale, 2000), opt.seed + 1);
        const WorstCase wc = worst_case_ratio(h, scaled(4000, opt.scale, 400), opt.seed + 2);
        out << tag << "," << fmt(ratio.mean) << "," << fmt(ratio.stderror) << ","
            << (wc.worst_deficit >= -1e-9 ? 1 : 0) << "," << fmt(wc.worst_deficit) << "\n";
    }
    return out.str();
}

std::string ch6_revenue(const PresetOptions& opt) {
    std::ostringstream out;
    out << header("ch6-revenue", opt);
    out << "mechanism,samples,mean,stderr\n";
    const size_t samples = scaled(1e4, opt.scale, 500);
    const RevenueEstimate optimal = optimal_revenue(samples, 1000, opt.seed, opt.threads);
    out << "optimal," << samples << "," << fmt(optimal.mean) << "," << fmt(optimal.stderror)
        << "\n";
    AMASpec vcg;
    vcg.a.kind = Curve::Kind::Polynomial;
    vcg.a.coef = {0.0};
    const RevenueEstimate plain = ama_expected_revenue(vcg, samples, opt.seed, opt.threads);
    out << "vcg," << samples << "," << fmt(plain.mean) << "," << fmt(plain.stderror) << "\n";
    GAConfig ga;
    ga.population = 60;
    ga.elite = 20;
    ga.rounds = static_cast<int>(scaled(100, opt.scale, 3));
    ga.fitness_profiles = 200;
    ga.mutation_delta = 4.0;
    ga.heldout = static_cast<int>(scaled(1e4, opt.scale, 500));
    ga.threads = opt.threads;
    ga.seed = opt.seed;
    const CurveGAResult fourier = evolve_market_curve(Curve::Kind::Fourier, 61, ga);
    out << "ama-fourier30," << ga.heldout << "," << fmt(fourier.revenue) << ",nan\n";
    return out.str();
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"ch3-twopeak", "ch3-ub", "ch4-delays",
                                                   "ch5-expectation", "ch6-revenue"};
    return names;
}

std::string run_preset(const std::string& name, const PresetOptions& options) {
    if (name == "ch3-twopeak") return ch3_twopeak(options);
    if (name == "ch3-ub") return ch3_ub(options);
    if (name == "ch4-delays") return ch4_delays(options);
    if (name == "ch5-expectation") return ch5_expectation(options);
    if (name == "ch6-revenue") return ch6_revenue(options);
    throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace mech::tables
