#include "mech/market.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace mech {

namespace {

constexpr double kThetaOMax = 400.0;
constexpr double kThetaDMax = 15.0;

void check_time(double t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("ending time outside [0,1]");
}

// Shared Monte Carlo scaffold over (theta_O, theta_D) pairs.
template <class PerSample>
RevenueEstimate revenue_mc(size_t samples, uint64_t seed, int threads, const PerSample& payment) {
    if (samples < 1) throw std::invalid_argument("revenue estimation needs samples >= 1");
    const int shards = std::max(threads, 1);
    std::vector<double> sums(shards, 0.0), sumsqs(shards, 0.0);
    std::vector<size_t> counts(shards, samples / shards);
    for (size_t r = 0; r < samples % shards; ++r) counts[r] += 1;
    const auto run = [&](int s) {
        Rng rng = Rng::stream(seed, static_cast<uint64_t>(s));
        double acc = 0.0, accsq = 0.0;
        for (size_t t = 0; t < counts[s]; ++t) {
            const MarketTypes types{rng.uniform() * kThetaOMax, rng.uniform() * kThetaDMax};
            const double p = payment(types);
            acc += p;
            accsq += p * p;
        }
        sums[s] = acc;
        sumsqs[s] = accsq;
    };
    if (shards == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (int s = 0; s < shards; ++s) pool.emplace_back(run, s);
        for (auto& th : pool) th.join();
    }
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < shards; ++s) {
        sum += sums[s];
        sumsq += sumsqs[s];
    }
    RevenueEstimate est;
    est.mean = sum / static_cast<double>(samples);
    const double var = std::max(0.0, sumsq / samples - est.mean * est.mean);
    est.stderror = std::sqrt(var / static_cast<double>(samples));
    return est;
}

}  // namespace

double offender_value(double theta_o, double t_end) {
    check_time(t_end);
    return theta_o * (t_end - 0.5 * t_end * t_end);
}

double defender_value(double theta_d, double t_end) {
    check_time(t_end);
    return theta_d * 0.5 * (1.0 - t_end * t_end);
}

MarketOutcome ama_outcome(const MarketTypes& types, const AMASpec& spec) {
    if (!spec.valid()) throw std::invalid_argument("invalid AMA spec");
    const int k = spec.k;
    double best = -1e300, best_off = -1e300, best_def = -1e300;
    int arg = 0;
    std::vector<double> offset(k + 1);
    for (int i = 0; i <= k; ++i) {
        const double t = static_cast<double>(i) / k;
        offset[i] = spec.a.eval(t);
        const double vo = offender_value(types.theta_o, t);
        const double vd = spec.u_defender * defender_value(types.theta_d, t);
        if (vo + vd + offset[i] > best) {
            best = vo + vd + offset[i];
            arg = i;
        }
        // Best affine welfare achievable without each agent.
        best_off = std::max(best_off, vd + offset[i]);
        best_def = std::max(best_def, vo + offset[i]);
    }
    const double t_star = static_cast<double>(arg) / k;
    MarketOutcome out;
    out.t_end = t_star;
    out.p_offender = best_off - (spec.u_defender * defender_value(types.theta_d, t_star) +
                                 offset[arg]);
    out.p_defender = (best_def - (offender_value(types.theta_o, t_star) + offset[arg])) /
                     spec.u_defender;
    return out;
}

double optimal_allocation(const MarketTypes& types, int grid) {
    const double co = 2.0 * types.theta_o - kThetaOMax;
    const double cd = 2.0 * types.theta_d - kThetaDMax;
    double best = -1e300;
    int arg = 0;
    for (int i = 0; i <= grid; ++i) {
        const double t = static_cast<double>(i) / grid;
        const double v = co * (t - 0.5 * t * t) + cd * (1.0 - t);
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    return static_cast<double>(arg) / grid;
}

RevenueEstimate optimal_revenue(size_t samples, int grid, uint64_t seed, int threads,
                                int integral_points) {
    return revenue_mc(samples, seed, threads, [&](const MarketTypes& types) {
        const double t_star = optimal_allocation(types, grid);
        // Allocation amounts: q_O = t - t^2/2 consumed by the offender,
        // q_D = (1 - t^2)/2 by the defender.
        const double q_o = t_star - 0.5 * t_star * t_star;
        const double q_d = 0.5 * (1.0 - t_star * t_star);

        // p_i = theta_i q_i(theta) - integral_0^theta_i q_i(s, theta_-i) ds.
        double int_o = 0.0, int_d = 0.0;
        double prev_q = 0.0;
        {
            const double t0 = optimal_allocation({0.0, types.theta_d}, grid);
            prev_q = t0 - 0.5 * t0 * t0;
        }
        for (int j = 1; j <= integral_points; ++j) {
            const double s = types.theta_o * static_cast<double>(j) / integral_points;
            const double t = optimal_allocation({s, types.theta_d}, grid);
            const double q = t - 0.5 * t * t;
            int_o += 0.5 * (prev_q + q) * (types.theta_o / integral_points);
            prev_q = q;
        }
        {
            const double t0 = optimal_allocation({types.theta_o, 0.0}, grid);
            prev_q = 0.5 * (1.0 - t0 * t0);
        }
        for (int j = 1; j <= integral_points; ++j) {
            const double s = types.theta_d * static_cast<double>(j) / integral_points;
            const double t = optimal_allocation({types.theta_o, s}, grid);
            const double q = 0.5 * (1.0 - t * t);
            int_d += 0.5 * (prev_q + q) * (types.theta_d / integral_points);
            prev_q = q;
        }
        const double p_o = types.theta_o * q_o - int_o;
        const double p_d = types.theta_d * q_d - int_d;
        return p_o + p_d;
    });
}

RevenueEstimate ama_expected_revenue(const AMASpec& spec, size_t samples, uint64_t seed,
                                     int threads) {
    return revenue_mc(samples, seed, threads, [&](const MarketTypes& types) {
        const MarketOutcome out = ama_outcome(types, spec);
        return out.p_offender + out.p_defender;
    });
}

CurveGAResult evolve_market_curve(Curve::Kind kind, size_t coef_count, const GAConfig& config,
                                  int fitness_grid, int heldout_grid) {
    // Revenue of one curve over a batch of profiles: the curve is evaluated
    // once on the grid, then reused for every profile.
    const auto batch_revenue = [](const Curve& curve, const std::vector<MarketTypes>& batch,
                                  int k) {
        std::vector<double> offset(k + 1);
        for (int i = 0; i <= k; ++i) offset[i] = curve.eval(static_cast<double>(i) / k);
        double total = 0.0;
        for (const auto& types : batch) {
            double best = -1e300, best_off = -1e300, best_def = -1e300;
            int arg = 0;
            for (int i = 0; i <= k; ++i) {
                const double t = static_cast<double>(i) / k;
                const double vo = types.theta_o * (t - 0.5 * t * t);
                const double vd = types.theta_d * 0.5 * (1.0 - t * t);
                const double w = vo + vd + offset[i];
                if (w > best) {
                    best = w;
                    arg = i;
                }
                best_off = std::max(best_off, vd + offset[i]);
                best_def = std::max(best_def, vo + offset[i]);
            }
            const double t_star = static_cast<double>(arg) / k;
            const double vo = types.theta_o * (t_star - 0.5 * t_star * t_star);
            const double vd = types.theta_d * 0.5 * (1.0 - t_star * t_star);
            total += (best_off - (vd + offset[arg])) + (best_def - (vo + offset[arg]));
        }
        return total / static_cast<double>(batch.size());
    };

    const auto sample_batch = [](uint64_t seed, size_t count) {
        Rng rng(seed);
        std::vector<MarketTypes> batch(count);
        for (auto& types : batch)
            types = {rng.uniform() * kThetaOMax, rng.uniform() * kThetaDMax};
        return batch;
    };

    EvolveOps<Curve> ops;
    ops.init = [kind, coef_count](Rng& rng) { return curve_init(kind, coef_count, rng); };
    ops.reproduce = [&config](const std::vector<Curve>& elites, Rng& rng) {
        const Curve& a = elites[rng.below(elites.size())];
        if (rng.uniform() < 0.5) {
            const Curve& b = elites[rng.below(elites.size())];
            return curve_mutation(curve_crossover(a, b, rng), config, rng);
        }
        return curve_mutation(a, config, rng);
    };

    const auto evaluate = [&](const std::vector<Curve>& population, uint64_t round_seed) {
        const auto batch = sample_batch(round_seed, config.fitness_profiles);
        std::vector<double> fitness(population.size());
        const int workers = std::max(config.threads, 1);
        std::atomic<size_t> next{0};
        const auto run = [&] {
            for (size_t i = next.fetch_add(1); i < population.size(); i = next.fetch_add(1))
                fitness[i] = batch_revenue(population[i], batch, fitness_grid);
        };
        if (workers == 1) {
            run();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(run);
            for (auto& th : pool) th.join();
        }
        return fitness;
    };
    const auto heldout_batch = sample_batch(config.seed * 31 + 7, config.heldout);
    const auto heldout = [&](const Curve& c) {
        return batch_revenue(c, heldout_batch, heldout_grid);
    };

    const EvolveResult<Curve> ga = evolve<Curve>(config, ops, evaluate, heldout);
    CurveGAResult result;
    result.best = ga.best;
    result.revenue = ga.heldout_fitness;
    result.trace = ga.trace;
    return result;
}

}  // namespace mech
