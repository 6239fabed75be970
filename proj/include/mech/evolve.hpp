#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mech/delay.hpp"
#include "mech/priors.hpp"
#include "mech/rng.hpp"

namespace mech {

struct GAConfig {
    int population = 200;
    int elite = 100;
    int rounds = 200;
    int fitness_profiles = 200;
    double mutation_prob = 0.2;
    double mutation_delta = 0.5;   // additive step for curve coefficients
    double perturb_range = 0.1;    // +-10% multiplicative neighbourhood step
    double prune_l1 = 1e-4;
    int heldout = 10000;
    int threads = 1;
    uint64_t seed = 42;
};

// Codec supplied by the caller. `reproduce` creates one offspring from the
// elite pool; `filter` drops invalid individuals (nullptr = accept all);
// `prune` optionally rewrites the population in place between rounds.
template <class G>
struct EvolveOps {
    std::function<G(Rng&)> init;
    std::function<G(const std::vector<G>& elites, Rng&)> reproduce;
    std::function<bool(const G&)> filter;
    std::function<void(std::vector<G>&, Rng&)> prune;
};

template <class G>
struct EvolveResult {
    G best;
    double heldout_fitness = 0.0;
    std::vector<std::pair<double, double>> trace;  // (best, mean) per round
};

// Maximizes fitness. `evaluate` scores a whole population on fresh profiles
// derived from `round_seed` (the same profiles for every individual of the
// round); `heldout` scores a single genome on the big fixed evaluation set.
template <class G>
EvolveResult<G> evolve(const GAConfig& config, const EvolveOps<G>& ops,
                       const std::function<std::vector<double>(const std::vector<G>&,
                                                               uint64_t round_seed)>& evaluate,
                       const std::function<double(const G&)>& heldout);

// ---- Genome codecs ----------------------------------------------------

// Sequential-unanimous codec (Ch.4 TGA/ATGA).
SequentialMechanism sequence_init(size_t n, Rng& rng);
SequentialMechanism sequence_crossover(const SequentialMechanism& a, const SequentialMechanism& b,
                                       Rng& rng);
SequentialMechanism sequence_mutation(const SequentialMechanism& m, const GAConfig& config,
                                      Rng& rng);
// Drops genes never unanimously accepted on the sampled profiles and
// deduplicates genes closer than `threshold` in L1 distance.
SequentialMechanism prune_sequence(const SequentialMechanism& m,
                                   const std::vector<TypeProfile>& profiles, double threshold);

struct SequenceGAResult {
    SequentialMechanism best;
    double sum_delay = 0.0;  // held-out expected sum-delay of `best`
    std::vector<std::pair<double, double>> trace;
    bool strict = true;      // ATGA: final strict/loose verdict of `best`
};

// TGA when `strict` is true (strict filter every round); ATGA otherwise
// (loose simulation filter, final 1e4-profile SP verdict reported).
SequenceGAResult evolve_sequences(const Prior& prior, size_t n, const GAConfig& config,
                                  bool strict);

// Single-variable curve a(t) on [0,1].
struct Curve {
    enum class Kind { PiecewiseLinear, Polynomial, Fourier };
    Kind kind = Kind::Polynomial;
    // PiecewiseLinear: k+1 endpoint values on the uniform grid.
    // Polynomial: coefficients c_0..c_d of powers of t.
    // Fourier: c_0, then (c_j, c'_j) pairs; a(t) = c0/2 + sum cj cos(2pi j t/p)
    //          + c'j sin(2pi j t/p).
    std::vector<double> coef;
    double period = 2.0;  // Fourier only

    double eval(double t) const;
};

double curve_eval(const Curve& c, double t);

Curve curve_init(Curve::Kind kind, size_t coef_count, Rng& rng);
Curve curve_crossover(const Curve& a, const Curve& b, Rng& rng);  // two-point
Curve curve_mutation(const Curve& c, const GAConfig& config, Rng& rng);

template <class G>
EvolveResult<G> evolve(const GAConfig& config, const EvolveOps<G>& ops,
                       const std::function<std::vector<double>(const std::vector<G>&,
                                                               uint64_t round_seed)>& evaluate,
                       const std::function<double(const G&)>& heldout) {
    if (config.elite > config.population || config.population < 1)
        throw std::invalid_argument("elite count must not exceed the population size");
    Rng rng(config.seed);
    std::vector<G> population;
    population.reserve(config.population);
    while (static_cast<int>(population.size()) < config.population) {
        G g = ops.init(rng);
        if (!ops.filter || ops.filter(g)) population.push_back(std::move(g));
    }

    EvolveResult<G> result;
    std::vector<G> elites;
    for (int round = 0; round < config.rounds; ++round) {
        if (ops.prune) ops.prune(population, rng);
        const std::vector<double> fitness = evaluate(population, config.seed + 1 + round);
        std::vector<size_t> order(population.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        // Ties broken by creation order for determinism.
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return fitness[a] > fitness[b]; });
        double mean = 0.0;
        for (double f : fitness) mean += f;
        result.trace.emplace_back(fitness[order.front()], mean / fitness.size());

        elites.clear();
        for (int i = 0; i < config.elite && i < static_cast<int>(order.size()); ++i)
            elites.push_back(population[order[i]]);
        population = elites;
        int attempts = 0;
        const int max_attempts = 200 * config.population;
        while (static_cast<int>(population.size()) < config.population) {
            G child = ops.reproduce(elites, rng);
            if (!ops.filter || ops.filter(child) || ++attempts > max_attempts)
                population.push_back(attempts > max_attempts ? elites[rng.below(elites.size())]
                                                             : std::move(child));
        }
    }

    // Final winner: best of the last elite pool on the held-out set.
    if (elites.empty()) elites = population;
    result.best = elites.front();
    result.heldout_fitness = heldout(elites.front());
    for (size_t i = 1; i < elites.size(); ++i) {
        const double f = heldout(elites[i]);
        if (f > result.heldout_fitness) {
            result.heldout_fitness = f;
            result.best = elites[i];
        }
    }
    return result;
}

}  // namespace mech
