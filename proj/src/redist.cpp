#include "mech/redist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mech {

namespace {

size_t combo_dims(FeatureCombo combo, size_t m) {
    switch (combo) {
        case FeatureCombo::identity: return m;
        case FeatureCombo::combo1: return 2;
        case FeatureCombo::combo7:
        case FeatureCombo::combo8: return 3;
    }
    return m;
}

std::vector<double> axis_bounds(FeatureCombo combo, size_t m) {
    const double rest = m >= 2 ? static_cast<double>(m - 1) : 1.0;
    switch (combo) {
        case FeatureCombo::identity: return std::vector<double>(m, 1.0);
        case FeatureCombo::combo1: return {1.0, rest};
        case FeatureCombo::combo7: return {1.0, rest, 1.0};
        case FeatureCombo::combo8: return {1.0, 1.0, rest};
    }
    return std::vector<double>(m, 1.0);
}

}  // namespace

std::vector<double> features(std::vector<double> v, FeatureCombo combo) {
    if (v.empty()) throw std::invalid_argument("feature extraction needs at least one value");
    std::sort(v.begin(), v.end(), std::greater<>());
    const double max = v.front();
    const double rest = std::accumulate(v.begin() + 1, v.end(), 0.0);
    switch (combo) {
        case FeatureCombo::identity:
            return v;
        case FeatureCombo::combo1:
            return {max, rest};
        case FeatureCombo::combo7: {
            double jump = 0.0;
            for (size_t i = 1; i < v.size(); ++i) jump = std::max(jump, v[i - 1] - v[i]);
            return {max, rest, jump};
        }
        case FeatureCombo::combo8:
            return {max, v.back(), rest};
    }
    return v;
}

RedistributionFn::RedistributionFn(size_t n, FeatureCombo combo, size_t knots_per_axis,
                                   std::vector<double> knot_values)
    : n_(n), combo_(combo), knots_(knots_per_axis) {
    if (n < 2) throw std::invalid_argument("redistribution needs n >= 2");
    if (knots_ < 2) throw std::invalid_argument("need at least two knots per axis");
    dims_ = combo_dims(combo, n - 1);
    axis_hi_ = axis_bounds(combo, n - 1);
    size_t expect = 1;
    for (size_t d = 0; d < dims_; ++d) expect *= knots_;
    if (knot_values.size() != expect)
        throw std::invalid_argument("knot grid has the wrong size");
    values_ = std::move(knot_values);
}

RedistributionFn RedistributionFn::baseline(size_t n, FeatureCombo combo, size_t knots_per_axis) {
    const size_t m = n - 1;
    const size_t dims = combo_dims(combo, m);
    const auto hi = axis_bounds(combo, m);
    size_t total = 1;
    for (size_t d = 0; d < dims; ++d) total *= knots_per_axis;
    std::vector<double> values(total);
    const double scale = static_cast<double>(n - 1) / static_cast<double>(n);
    for (size_t idx = 0; idx < total; ++idx) {
        // Decode the knot's feature coordinates.
        size_t rem = idx;
        std::vector<double> f(dims);
        for (size_t d = dims; d-- > 0;) {
            f[d] = hi[d] * static_cast<double>(rem % knots_per_axis) /
                   static_cast<double>(knots_per_axis - 1);
            rem /= knots_per_axis;
        }
        double sum = 0.0;
        if (combo == FeatureCombo::identity)
            sum = std::accumulate(f.begin(), f.end(), 0.0);
        else if (combo == FeatureCombo::combo8)
            sum = f[0] + f[2];
        else
            sum = f[0] + f[1];
        values[idx] = scale * (sum + 1.0);
    }
    return RedistributionFn(n, combo, knots_per_axis, std::move(values));
}

double RedistributionFn::operator()(const std::vector<double>& theta_minus_i) const {
    if (theta_minus_i.size() != n_ - 1)
        throw std::invalid_argument("theta_{-i} must have n-1 entries");
    const std::vector<double> f = features(theta_minus_i, combo_);
    // Multilinear interpolation over the 2^dims surrounding knots.
    std::vector<size_t> base(dims_);
    std::vector<double> frac(dims_);
    for (size_t d = 0; d < dims_; ++d) {
        const double u = std::clamp(f[d] / axis_hi_[d], 0.0, 1.0) *
                         static_cast<double>(knots_ - 1);
        base[d] = std::min(static_cast<size_t>(u), knots_ - 2);
        frac[d] = u - static_cast<double>(base[d]);
    }
    double acc = 0.0;
    for (size_t corner = 0; corner < (size_t{1} << dims_); ++corner) {
        double weight = 1.0;
        size_t idx = 0;
        for (size_t d = 0; d < dims_; ++d) {
            const bool high = corner & (size_t{1} << d);
            weight *= high ? frac[d] : 1.0 - frac[d];
            idx = idx * knots_ + base[d] + (high ? 1 : 0);
        }
        acc += weight * values_[idx];
    }
    return acc;
}

std::string RedistributionFn::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << static_cast<int>(combo_) << ',' << n_ << ',' << knots_;
    for (double v : values_) os << ',' << v;
    os << '\n';
    return os.str();
}

double first_best(const TypeProfile& profile) {
    const double total = std::accumulate(profile.values.begin(), profile.values.end(), 0.0);
    return std::max(total, 1.0);
}

RedistOutcome redist_outcome(const TypeProfile& profile, const RedistributionFn& h) {
    const size_t n = profile.n();
    if (h.n() != n) throw std::invalid_argument("h sized for a different agent count");
    const double total = std::accumulate(profile.values.begin(), profile.values.end(), 0.0);
    const double s = std::max(total, 1.0);

    RedistOutcome out;
    out.built = total >= 1.0;
    out.receive.resize(n);
    out.utilities.resize(n);
    double sum_h = 0.0;
    std::vector<double> others(n - 1);
    for (size_t i = 0; i < n; ++i) {
        size_t k = 0;
        for (size_t j = 0; j < n; ++j)
            if (j != i) others[k++] = profile[j];
        const double hi = h(others);
        sum_h += hi;
        if (out.built) {
            out.receive[i] = (total - profile[i]) - hi;
            out.utilities[i] = profile[i] + out.receive[i];
        } else {
            out.receive[i] = static_cast<double>(n - 1) / static_cast<double>(n) - hi;
            // The agent keeps her 1/n cost share when nothing is built; the
            // paper's welfare formula n*S - sum h embeds it.
            out.utilities[i] = 1.0 / static_cast<double>(n) + out.receive[i];
        }
    }
    out.welfare = static_cast<double>(n) * s - sum_h;
    out.ratio = static_cast<double>(n) - sum_h / s;
    return out;
}

double feasibility_ratio(const TypeProfile& profile, const RedistributionFn& h) {
    const RedistOutcome out = redist_outcome(profile, h);
    return static_cast<double>(profile.n()) - out.ratio;  // sum h / S
}

FeasibilityReport is_feasible(const RedistributionFn& h, const Prior& prior, size_t profiles,
                              uint64_t seed) {
    FeasibilityReport report;
    report.profiles = profiles;
    Rng rng(seed);
    const double need = static_cast<double>(h.n() - 1);
    for (size_t t = 0; t < profiles; ++t) {
        TypeProfile profile(prior.sample(rng, h.n()));
        const double s = first_best(profile);
        const double slack = (feasibility_ratio(profile, h) - need) * s;
        if (slack < -1e-9) {
            report.violations += 1;
            if (slack < report.worst_slack) {
                report.worst_slack = slack;
                report.witness = profile;
            }
        }
    }
    return report;
}

namespace {

// Profile-space adversary: small evolutionary search plus the corner scan.
template <class Score>
std::pair<double, TypeProfile> adversary(const RedistributionFn& h, size_t budget, uint64_t seed,
                                         const Score& score) {
    const size_t n = h.n();
    Rng rng(seed);
    const size_t pop_size = 40;
    const size_t elite = 10;
    const size_t rounds = std::max<size_t>(budget / pop_size, 10);

    std::vector<std::vector<double>> pop(pop_size);
    for (auto& p : pop) {
        p.resize(n);
        for (auto& x : p) x = rng.uniform();
    }
    const auto better = [&](const std::vector<double>& a, const std::vector<double>& b) {
        return score(a) > score(b);
    };
    for (size_t round = 0; round < rounds; ++round) {
        std::stable_sort(pop.begin(), pop.end(), better);
        for (size_t i = elite; i < pop_size; ++i) {
            std::vector<double> child = pop[rng.below(elite)];
            for (auto& x : child) {
                const double move = rng.uniform();
                if (move < 0.15)
                    x = 0.0;
                else if (move < 0.30)
                    x = 1.0;
                else if (move < 0.75)
                    x = std::clamp(x + rng.uniform(-0.1, 0.1), 0.0, 1.0);
            }
            pop[i] = std::move(child);
        }
    }
    std::stable_sort(pop.begin(), pop.end(), better);
    std::vector<double> best = pop.front();

    // Structured corners {0, 1/n, 1}^n.
    if (n <= 10) {
        std::vector<double> probe(n);
        const double levels[3] = {0.0, 1.0 / static_cast<double>(n), 1.0};
        size_t total = 1;
        for (size_t i = 0; i < n; ++i) total *= 3;
        for (size_t code = 0; code < total; ++code) {
            size_t rem = code;
            for (size_t i = 0; i < n; ++i) {
                probe[i] = levels[rem % 3];
                rem /= 3;
            }
            if (score(probe) > score(best)) best = probe;
        }
    }
    return {score(best), TypeProfile(best)};
}

}  // namespace

WorstCase worst_case_ratio(const RedistributionFn& h, size_t budget, uint64_t seed) {
    const double n = static_cast<double>(h.n());
    WorstCase wc;
    // Minimal efficiency ratio <=> maximal sum h / S.
    auto [ratio_term, witness] = adversary(
        h, budget, seed,
        [&](const std::vector<double>& p) { return feasibility_ratio(TypeProfile(p), h); });
    wc.alpha = n - ratio_term;
    wc.witness = witness;
    // Worst budget deficit: minimize sum h - (n-1) S.
    auto [neg_deficit, deficit_witness] = adversary(
        h, budget, seed + 1, [&](const std::vector<double>& p) {
            const TypeProfile profile(p);
            const double s = first_best(profile);
            return -(feasibility_ratio(profile, h) - (n - 1.0)) * s;
        });
    wc.worst_deficit = -neg_deficit;
    wc.deficit_witness = deficit_witness;
    return wc;
}

MonteCarloMean expected_ratio_terms(const RedistributionFn& h, const Prior& prior, size_t samples,
                                    uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("expected_ratio_terms needs samples >= 1");
    Rng rng(seed);
    double sum = 0.0, sumsq = 0.0;
    for (size_t t = 0; t < samples; ++t) {
        const double r = feasibility_ratio(TypeProfile(prior.sample(rng, h.n())), h);
        sum += r;
        sumsq += r * r;
    }
    MonteCarloMean out;
    out.mean = sum / static_cast<double>(samples);
    const double var = std::max(0.0, sumsq / samples - out.mean * out.mean);
    out.stderror = std::sqrt(var / static_cast<double>(samples));
    return out;
}

RedistributionFn optimize_h(RedistObjective objective, const Prior& prior, size_t n,
                            const GAConfig& ga, FeatureCombo combo) {
    const size_t knots = 8;
    const RedistributionFn base = RedistributionFn::baseline(n, combo, knots);
    const size_t genome_size = base.values().size();
    const double eps = objective == RedistObjective::worst_case ? 1e-2 : 1e-4;
    const double need = static_cast<double>(n - 1);
    const double margin = 5e-3;  // train with slack so test-time profiles stay feasible

    const auto make_fn = [&](const std::vector<double>& genome) {
        return RedistributionFn(n, combo, knots, genome);
    };

    // Fixed constraint battery: random profiles plus the corner set.
    std::vector<TypeProfile> battery;
    {
        Rng rng(ga.seed ^ 0xc0137u);
        for (int i = 0; i < 2000; ++i) battery.emplace_back(prior.sample(rng, n));
        size_t total = 1;
        for (size_t i = 0; i < n; ++i) total *= 3;
        const double levels[3] = {0.0, 1.0 / static_cast<double>(n), 1.0};
        for (size_t code = 0; code < total; ++code) {
            size_t rem = code;
            std::vector<double> p(n);
            for (size_t i = 0; i < n; ++i) {
                p[i] = levels[rem % 3];
                rem /= 3;
            }
            battery.emplace_back(std::move(p));
        }
    }

    const auto loss = [&](const std::vector<double>& genome,
                          const std::vector<TypeProfile>& profiles) {
        const RedistributionFn h = make_fn(genome);
        double objective_loss = 0.0;
        double constraint_loss = 0.0;
        for (const auto& profile : profiles) {
            const double term = feasibility_ratio(profile, h);
            if (objective == RedistObjective::worst_case)
                objective_loss = std::max(objective_loss, term);
            else
                objective_loss += term / static_cast<double>(profiles.size());
            const double hinge =
                std::max(0.0, (need + margin) * first_best(profile) - term * first_best(profile));
            constraint_loss += hinge * hinge;
        }
        for (const auto& profile : battery) {
            const double slack =
                (feasibility_ratio(profile, h) - (need + margin)) * first_best(profile);
            const double hinge = std::max(0.0, -slack);
            constraint_loss += hinge * hinge;
        }
        return eps * objective_loss + constraint_loss;
    };

    EvolveOps<std::vector<double>> ops;
    bool first = true;
    ops.init = [&](Rng& rng) {
        std::vector<double> genome = base.values();
        if (!first)
            for (auto& v : genome) v += rng.uniform(-0.2, 0.2);
        first = false;
        return genome;
    };
    ops.reproduce = [&](const std::vector<std::vector<double>>& elites, Rng& rng) {
        std::vector<double> child = elites[rng.below(elites.size())];
        if (rng.uniform() < 0.5) {
            const auto& other = elites[rng.below(elites.size())];
            size_t p1 = rng.below(genome_size + 1), p2 = rng.below(genome_size + 1);
            if (p1 > p2) std::swap(p1, p2);
            for (size_t i = p1; i < p2; ++i) child[i] = other[i];
        }
        if (rng.uniform() < 0.3) {
            // Uniform shift: moves the whole surface toward/away feasibility.
            const double shift = rng.uniform(-0.05, 0.05);
            for (auto& v : child) v += shift;
        } else {
            for (auto& v : child)
                if (rng.uniform() < ga.mutation_prob) v += rng.uniform(-0.1, 0.1);
        }
        return child;
    };

    const auto evaluate = [&](const std::vector<std::vector<double>>& population,
                              uint64_t round_seed) {
        Rng rng(round_seed);
        std::vector<TypeProfile> profiles;
        for (int i = 0; i < ga.fitness_profiles; ++i) profiles.emplace_back(prior.sample(rng, n));
        std::vector<double> fitness(population.size());
        for (size_t i = 0; i < population.size(); ++i) fitness[i] = -loss(population[i], profiles);
        return fitness;
    };
    Rng heldout_rng(ga.seed * 31 + 7);
    std::vector<TypeProfile> heldout_profiles;
    for (int i = 0; i < ga.heldout; ++i) heldout_profiles.emplace_back(prior.sample(heldout_rng, n));
    const auto heldout = [&](const std::vector<double>& genome) {
        return -loss(genome, heldout_profiles);
    };

    const auto ga_result = evolve<std::vector<double>>(ga, ops, evaluate, heldout);
    RedistributionFn h = make_fn(ga_result.best);

    // Certification: push the surface up until the adversary finds no deficit.
    for (int attempt = 0; attempt < 12; ++attempt) {
        const WorstCase wc = worst_case_ratio(h, 4000, ga.seed + 77 + attempt);
        if (wc.worst_deficit >= 0.0) break;
        const double lift = (-wc.worst_deficit + 1e-6) / static_cast<double>(n);
        for (auto& v : h.values()) v += lift;
    }
    return h;
}

}  // namespace mech
