#include "mech/core.hpp"

#include <cmath>
#include <sstream>

namespace mech {

std::string PropertyReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "trial,agent,true_value,misreport,gain\n";
    for (const auto& v : violations)
        os << v.trial << ',' << v.agent << ',' << v.true_value << ',' << v.misreport << ','
           << v.gain << '\n';
    return os.str();
}

UtilityFn binary_utility(BinaryMechanism mech) {
    return [mech = std::move(mech)](const TypeProfile& reported, size_t agent, double true_value) {
        const BinaryOutcome out = mech(reported);
        const double consume = out.consumes(agent) ? true_value : 0.0;
        return consume - (out.built ? out.payments[agent] : 0.0);
    };
}

namespace {

double draw_misreport(const Prior& prior, Rng& rng) {
    const double pick = rng.uniform();
    if (pick < 0.15) return prior.lo();
    if (pick < 0.30) return prior.hi();
    return prior.sample(rng);
}

}  // namespace

PropertyReport check_sp(const UtilityFn& utility, const Prior& prior, size_t n, size_t trials,
                        double tolerance, uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_sp requires at least one trial");
    PropertyReport report;
    report.trials = trials;
    Rng rng(seed);
    for (size_t t = 0; t < trials; ++t) {
        TypeProfile profile(prior.sample(rng, n));
        const size_t agent = static_cast<size_t>(rng.below(n));
        const double truth = profile[agent];
        const double lie = draw_misreport(prior, rng);
        const double honest = utility(profile, agent, truth);
        const double deviated = utility(profile.with(agent, lie), agent, truth);
        const double gain = deviated - honest;
        if (gain > tolerance) {
            report.violations.push_back({t, agent, truth, lie, gain, profile});
            report.max_gain = std::max(report.max_gain, gain);
        }
    }
    return report;
}

PropertyReport check_ir(const UtilityFn& utility, const Prior& prior, size_t n, size_t trials,
                        double tolerance, uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_ir requires at least one trial");
    PropertyReport report;
    report.trials = trials;
    Rng rng(seed);
    for (size_t t = 0; t < trials; ++t) {
        TypeProfile profile(prior.sample(rng, n));
        const size_t agent = static_cast<size_t>(rng.below(n));
        const double honest = utility(profile, agent, profile[agent]);
        if (honest < -tolerance) {
            report.violations.push_back({t, agent, profile[agent], profile[agent], -honest, profile});
            report.max_gain = std::max(report.max_gain, -honest);
        }
    }
    return report;
}

PropertyReport check_budget(const BinaryMechanism& mech, const Prior& prior, size_t n,
                            size_t trials, uint64_t seed) {
    return check_budget(
        [&mech](const TypeProfile& profile) {
            const BinaryOutcome out = mech(profile);
            const size_t n_agents = profile.n();
            if (out.payments.size() != n_agents) return false;
            double total = 0.0;
            for (size_t i = 0; i < n_agents; ++i) {
                if (out.payments[i] < 0.0) return false;
                if (!out.built && out.payments[i] != 0.0) return false;
                if (out.built && !out.consumers[i] && out.payments[i] != 0.0) return false;
                total += out.payments[i];
            }
            if (!out.built) {
                for (size_t i = 0; i < out.consumers.size(); ++i)
                    if (out.consumers[i]) return false;
                return true;
            }
            return std::abs(total - 1.0) <= 1e-9;
        },
        prior, n, trials, seed);
}

PropertyReport check_budget(const std::function<bool(const TypeProfile&)>& predicate,
                            const Prior& prior, size_t n, size_t trials, uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_budget requires at least one trial");
    PropertyReport report;
    report.trials = trials;
    Rng rng(seed);
    for (size_t t = 0; t < trials; ++t) {
        TypeProfile profile(prior.sample(rng, n));
        if (!predicate(profile)) {
            report.violations.push_back({t, 0, 0.0, 0.0, 1.0, profile});
            report.max_gain = 1.0;
        }
    }
    return report;
}

}  // namespace mech
