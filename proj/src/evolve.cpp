#include "mech/evolve.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace mech {

namespace {

// Rescale the other agents' payments so the vector sums to 1 again.
void renormalize(CostTimeVector& vec, size_t fixed) {
    double others = 0.0;
    for (size_t j = 0; j < vec.B.size(); ++j)
        if (j != fixed) others += vec.B[j];
    const double target = std::max(0.0, 1.0 - vec.B[fixed]);
    if (others > 1e-12) {
        const double scale = target / others;
        for (size_t j = 0; j < vec.B.size(); ++j)
            if (j != fixed) vec.B[j] *= scale;
    } else {
        const double each = target / static_cast<double>(vec.B.size() - 1);
        for (size_t j = 0; j < vec.B.size(); ++j)
            if (j != fixed) vec.B[j] = each;
    }
    // Agents who are charged again must consume again.
    for (size_t j = 0; j < vec.B.size(); ++j)
        if (vec.B[j] > 0.0 && vec.T[j] >= 1.0) vec.T[j] = 0.0;
}

// Copy one gene, change one agent's offer, insert the copy after the original.
SequentialMechanism insert_mutation(const SequentialMechanism& m, Rng& rng) {
    SequentialMechanism out = m;
    const size_t pos = rng.below(out.sequence.size());
    CostTimeVector gene = out.sequence[pos];
    // A geometric number of coordinate edits: strict chains often need two
    // coordinated changes (re-charge one agent, exclude another) in a single
    // child, since filtered intermediates never survive a round.
    size_t edits = 0;
    do {
        const size_t i = rng.below(gene.B.size());
        const double pick = rng.uniform();
        // Exact 0 and 1 must stay reachable: atom-valued priors need offers
        // that hit the support endpoints exactly.
        if (pick < 0.35)
            gene.B[i] = 0.0;
        else if (pick < 0.50)
            gene.B[i] = 1.0;
        else
            gene.B[i] = rng.uniform();
        if (gene.B[i] == 0.0) {
            const double tpick = rng.uniform();
            gene.T[i] = tpick < 0.4 ? 1.0 : (tpick < 0.7 ? gene.T[i] : rng.uniform());
        } else {
            gene.T[i] = rng.uniform() < 0.5 ? gene.T[i] : rng.uniform() * 0.99;
        }
        renormalize(gene, i);
    } while (++edits < gene.B.size() && rng.uniform() < 0.5);
    out.sequence.insert(out.sequence.begin() + static_cast<long>(pos) + 1, std::move(gene));
    return out;
}

// Perturb every entry of one gene by a uniform factor in [-range, +range].
SequentialMechanism perturb_mutation(const SequentialMechanism& m, double range, Rng& rng) {
    SequentialMechanism out = m;
    CostTimeVector& gene = out.sequence[rng.below(out.sequence.size())];
    for (size_t i = 0; i < gene.B.size(); ++i) {
        gene.B[i] *= 1.0 + rng.uniform(-range, range);
        gene.T[i] = std::clamp(gene.T[i] * (1.0 + rng.uniform(-range, range)), 0.0, 1.0);
    }
    double total = 0.0;
    for (double b : gene.B) total += b;
    if (total > 1e-12)
        for (double& b : gene.B) b /= total;
    else
        gene.B.assign(gene.B.size(), 1.0 / static_cast<double>(gene.B.size()));
    for (size_t i = 0; i < gene.B.size(); ++i)
        if (gene.B[i] > 0.0 && gene.T[i] >= 1.0) gene.T[i] = 0.0;
    return out;
}

double gene_l1(const CostTimeVector& a, const CostTimeVector& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.B.size(); ++i)
        d += std::abs(a.B[i] - b.B[i]) + std::abs(a.T[i] - b.T[i]);
    return d;
}

}  // namespace

SequentialMechanism sequence_init(size_t n, Rng& rng) {
    CostTimeVector vec;
    vec.T.assign(n, 0.0);
    vec.B.assign(n, 0.0);
    if (rng.uniform() < 0.5) {
        vec.B[rng.below(n)] = 1.0;  // single payer; exact endpoint offers matter
    } else {
        double total = 0.0;
        for (auto& b : vec.B) {
            b = rng.uniform();
            total += b;
        }
        for (auto& b : vec.B) b /= total;
    }
    return SequentialMechanism{{vec}};
}

SequentialMechanism sequence_crossover(const SequentialMechanism& a, const SequentialMechanism& b,
                                       Rng& rng) {
    if (a.sequence.empty() || b.sequence.empty())
        throw std::invalid_argument("crossover requires nonempty parents");
    // Swap one gene segment at a shared position so identical parents map to
    // themselves.
    const size_t span = std::min(a.sequence.size(), b.sequence.size());
    size_t i1 = rng.below(span);
    size_t i2 = i1 + 1 + rng.below(span - i1);
    SequentialMechanism out;
    out.sequence.assign(a.sequence.begin(), a.sequence.begin() + static_cast<long>(i1));
    out.sequence.insert(out.sequence.end(), b.sequence.begin() + static_cast<long>(i1),
                        b.sequence.begin() + static_cast<long>(i2));
    out.sequence.insert(out.sequence.end(), a.sequence.begin() + static_cast<long>(i2),
                        a.sequence.end());
    return out;
}

SequentialMechanism sequence_mutation(const SequentialMechanism& m, const GAConfig& config,
                                      Rng& rng) {
    SequentialMechanism out = m;
    if (rng.uniform() < config.mutation_prob) out = insert_mutation(out, rng);
    if (rng.uniform() < config.mutation_prob) out = perturb_mutation(out, config.perturb_range, rng);
    return out;
}

SequentialMechanism prune_sequence(const SequentialMechanism& m,
                                   const std::vector<TypeProfile>& profiles, double threshold) {
    std::vector<bool> accepted(m.sequence.size(), false);
    for (const auto& profile : profiles) {
        for (size_t s = 0; s < m.sequence.size(); ++s) {
            bool all = true;
            for (size_t i = 0; i < profile.n() && all; ++i)
                all = m.sequence[s].accepts(i, profile[i]);
            if (all) {
                accepted[s] = true;
                break;
            }
        }
    }
    SequentialMechanism out;
    for (size_t s = 0; s < m.sequence.size(); ++s) {
        if (!accepted[s]) continue;
        bool dup = false;
        for (const auto& kept : out.sequence)
            if (gene_l1(kept, m.sequence[s]) < threshold) dup = true;
        if (!dup) out.sequence.push_back(m.sequence[s]);
    }
    if (out.sequence.empty()) out.sequence.push_back(m.sequence.front());
    return out;
}

SequenceGAResult evolve_sequences(const Prior& prior, size_t n, const GAConfig& config,
                                  bool strict) {
    const uint64_t loose_seed = config.seed ^ 0x5eedu;

    EvolveOps<SequentialMechanism> ops;
    ops.init = [n](Rng& rng) { return sequence_init(n, rng); };
    ops.reproduce = [&config](const std::vector<SequentialMechanism>& elites, Rng& rng) {
        const double op = rng.uniform();
        const SequentialMechanism& a = elites[rng.below(elites.size())];
        if (op < 1.0 / 3.0) {
            const SequentialMechanism& b = elites[rng.below(elites.size())];
            return sequence_crossover(a, b, rng);
        }
        if (op < 2.0 / 3.0) return insert_mutation(a, rng);
        return perturb_mutation(a, config.perturb_range, rng);
    };
    if (strict) {
        ops.filter = [](const SequentialMechanism& m) { return strict_filter(m); };
    } else {
        ops.filter = [&prior, loose_seed](const SequentialMechanism& m) {
            return m.valid() && loose_filter(m, prior, 200, loose_seed);
        };
    }
    ops.prune = [&](std::vector<SequentialMechanism>& population, Rng& rng) {
        std::vector<TypeProfile> profiles;
        profiles.reserve(config.fitness_profiles);
        for (int i = 0; i < config.fitness_profiles; ++i)
            profiles.emplace_back(prior.sample(rng, n));
        for (auto& m : population) m = prune_sequence(m, profiles, config.prune_l1);
    };

    const auto mean_sum_delay = [n](const SequentialMechanism& m,
                                    const std::vector<TypeProfile>& profiles) {
        double total = 0.0;
        for (const auto& profile : profiles)
            total += delay_objectives(sequential_unanimous(profile, m)).sum_delay;
        return total / static_cast<double>(profiles.size());
    };

    const auto evaluate = [&](const std::vector<SequentialMechanism>& population,
                              uint64_t round_seed) {
        Rng rng(round_seed);
        std::vector<TypeProfile> profiles;
        profiles.reserve(config.fitness_profiles);
        for (int i = 0; i < config.fitness_profiles; ++i)
            profiles.emplace_back(prior.sample(rng, n));
        std::vector<double> fitness(population.size());
        const int workers = std::max(config.threads, 1);
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        const auto run = [&] {
            for (size_t i = next.fetch_add(1); i < population.size(); i = next.fetch_add(1))
                fitness[i] = -mean_sum_delay(population[i], profiles);
        };
        if (workers == 1) {
            run();
        } else {
            for (int w = 0; w < workers; ++w) pool.emplace_back(run);
            for (auto& th : pool) th.join();
        }
        return fitness;
    };

    Rng heldout_rng(config.seed * 31 + 7);
    std::vector<TypeProfile> heldout_profiles;
    heldout_profiles.reserve(config.heldout);
    for (int i = 0; i < config.heldout; ++i)
        heldout_profiles.emplace_back(prior.sample(heldout_rng, n));
    const auto heldout = [&](const SequentialMechanism& m) {
        return -mean_sum_delay(m, heldout_profiles);
    };

    const EvolveResult<SequentialMechanism> ga =
        evolve<SequentialMechanism>(config, ops, evaluate, heldout);

    SequenceGAResult result;
    result.best = ga.best;
    result.sum_delay = -ga.heldout_fitness;
    result.trace = ga.trace;
    result.strict = strict ? strict_filter(ga.best)
                           : loose_filter(ga.best, prior, 10000, loose_seed + 1);
    return result;
}

double Curve::eval(double t) const {
    switch (kind) {
        case Kind::PiecewiseLinear: {
            const size_t k = coef.size() - 1;  // segments
            const double pos = std::clamp(t, 0.0, 1.0) * static_cast<double>(k);
            const size_t seg = std::min(static_cast<size_t>(pos), k - 1);
            const double frac = pos - static_cast<double>(seg);
            return coef[seg] * (1.0 - frac) + coef[seg + 1] * frac;
        }
        case Kind::Polynomial: {
            double acc = 0.0;
            for (size_t j = coef.size(); j-- > 0;) acc = acc * t + coef[j];
            return acc;
        }
        case Kind::Fourier: {
            double acc = coef[0] / 2.0;
            const double base = 2.0 * M_PI * t / period;
            for (size_t j = 1; 2 * j - 1 < coef.size(); ++j) {
                acc += coef[2 * j - 1] * std::cos(base * static_cast<double>(j));
                if (2 * j < coef.size()) acc += coef[2 * j] * std::sin(base * static_cast<double>(j));
            }
            return acc;
        }
    }
    return 0.0;
}

double curve_eval(const Curve& c, double t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("curve argument outside [0,1]");
    return c.eval(t);
}

Curve curve_init(Curve::Kind kind, size_t coef_count, Rng& rng) {
    Curve c;
    c.kind = kind;
    c.coef.resize(coef_count);
    if (kind == Curve::Kind::PiecewiseLinear) {
        // A random straight line sampled on the endpoint grid.
        const double slope = rng.uniform(-100.0, 100.0);
        const double intercept = rng.uniform(-100.0, 100.0);
        for (size_t i = 0; i < coef_count; ++i)
            c.coef[i] = intercept + slope * static_cast<double>(i) / (coef_count - 1);
    } else {
        for (auto& v : c.coef) v = rng.uniform(-10.0, 10.0);
    }
    return c;
}

Curve curve_crossover(const Curve& a, const Curve& b, Rng& rng) {
    if (a.kind != b.kind || a.coef.size() != b.coef.size())
        throw std::invalid_argument("curve crossover requires matching representations");
    Curve out = a;
    size_t p1 = rng.below(a.coef.size() + 1);
    size_t p2 = rng.below(a.coef.size() + 1);
    if (p1 > p2) std::swap(p1, p2);
    for (size_t i = p1; i < p2; ++i) out.coef[i] = b.coef[i];
    return out;
}

Curve curve_mutation(const Curve& c, const GAConfig& config, Rng& rng) {
    Curve out = c;
    for (auto& v : out.coef)
        if (rng.uniform() < config.mutation_prob)
            v += rng.uniform() < 0.5 ? -config.mutation_delta : config.mutation_delta;
    return out;
}

}  // namespace mech
