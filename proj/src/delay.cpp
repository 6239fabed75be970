#include "mech/delay.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "mech/costshare.hpp"

namespace mech {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DelayOutcome unbuilt(size_t n) {
    DelayOutcome out;
    out.release_times.assign(n, 1.0);
    out.payments.assign(n, 0.0);
    return out;
}

}  // namespace

bool CostTimeVector::valid() const {
    if (T.size() != B.size() || T.empty()) return false;
    double total = 0.0;
    for (size_t i = 0; i < T.size(); ++i) {
        if (T[i] < 0.0 || T[i] > 1.0 || B[i] < 0.0) return false;
        if (T[i] >= 1.0 && B[i] > 0.0) return false;  // payment for zero consumption
        total += B[i];
    }
    return std::abs(total - 1.0) <= 1e-9;
}

double CostTimeVector::unit_price(size_t i) const {
    if (B[i] <= 0.0) return T[i] >= 1.0 ? kInf : 0.0;
    return B[i] / (1.0 - T[i]);
}

bool CostTimeVector::accepts(size_t i, double v) const {
    if (B[i] <= 0.0) return true;  // nothing to pay, utility v*(1-T) >= 0
    return v >= B[i] / (1.0 - T[i]);
}

bool SequentialMechanism::valid() const {
    if (sequence.empty()) return false;
    return std::all_of(sequence.begin(), sequence.end(),
                       [](const CostTimeVector& v) { return v.valid(); });
}

std::string SequentialMechanism::to_csv(char sep) const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& vec : sequence) {
        for (size_t i = 0; i < vec.T.size(); ++i) os << vec.T[i] << sep;
        for (size_t i = 0; i < vec.B.size(); ++i) os << vec.B[i] << (i + 1 < vec.B.size() ? sep : '\n');
    }
    return os.str();
}

DelayOutcome single_deadline(const TypeProfile& profile, double d) {
    return multiple_deadline(profile, std::vector<double>(profile.n(), d));
}

DelayOutcome multiple_deadline(const TypeProfile& profile, const std::vector<double>& deadlines) {
    const size_t n = profile.n();
    if (deadlines.size() != n) throw std::invalid_argument("one deadline per agent required");
    for (double d : deadlines)
        if (d < 0.0 || d > 1.0) throw std::invalid_argument("deadline outside [0,1]");

    std::vector<double> scaled(n);
    for (size_t i = 0; i < n; ++i) scaled[i] = deadlines[i] * profile[i];

    const int k = coalition_feasibility(scaled).K;
    if (k == 0) {
        // The leave-one-out tests cannot succeed either: removing an agent
        // never creates a feasible coalition.
        return unbuilt(n);
    }
    DelayOutcome out;
    out.built = true;
    out.release_times.assign(n, 1.0);
    out.payments.assign(n, 0.0);

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scaled[a] > scaled[b]; });
    std::vector<bool> winner(n, false);
    for (int j = 0; j < k; ++j) winner[order[j]] = true;

    // Leave-one-out tests without the per-agent rescan: with c_k = #{j :
    // scaled_j >= 1/k}, agent i passes iff some k <= n-1 has
    // c_k - [scaled_i >= 1/k] >= k. If any c_k >= k+1 every agent passes;
    // otherwise exactly the agents below 1/min{k : c_k = k} do.
    std::vector<double> sorted(scaled);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    bool all_free = false;
    double free_below = 0.0;
    size_t count = 0;
    for (size_t kk = 1; kk + 1 <= n && !all_free; ++kk) {
        const double threshold = 1.0 / static_cast<double>(kk);
        while (count < n && sorted[count] >= threshold) ++count;
        if (count >= kk + 1)
            all_free = true;
        else if (count >= kk)
            free_below = std::max(free_below, threshold);
    }

    for (size_t i = 0; i < n; ++i) {
        const bool free_part = all_free || scaled[i] < free_below;
        if (winner[i]) {
            out.payments[i] = 1.0 / static_cast<double>(k);
            out.release_times[i] = free_part ? 0.0 : 1.0 - deadlines[i];
        } else {
            out.release_times[i] = free_part ? deadlines[i] : 1.0;
        }
    }
    return out;
}

DelayOutcome sequential_unanimous(const TypeProfile& profile, const SequentialMechanism& mech) {
    if (!mech.valid()) throw std::invalid_argument("invalid sequential mechanism");
    const size_t n = profile.n();
    for (const auto& vec : mech.sequence) {
        if (vec.T.size() != n) throw std::invalid_argument("vector sized for a different n");
        bool all = true;
        for (size_t i = 0; i < n && all; ++i) all = vec.accepts(i, profile[i]);
        if (all) {
            DelayOutcome out;
            out.built = true;
            out.release_times = vec.T;
            out.payments = vec.B;
            return out;
        }
    }
    return unbuilt(n);
}

bool strict_filter(const SequentialMechanism& mech) {
    if (!mech.valid()) return false;
    const size_t n = mech.sequence.front().T.size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t s = 1; s < mech.sequence.size(); ++s) {
            const auto& prev = mech.sequence[s - 1];
            const auto& cur = mech.sequence[s];
            if (cur.unit_price(i) < prev.unit_price(i) - 1e-12) return false;
            if (cur.T[i] < prev.T[i] - 1e-12) return false;
        }
    }
    return true;
}

bool loose_filter(const SequentialMechanism& mech, const Prior& prior, size_t profiles,
                  uint64_t seed) {
    if (profiles < 1) throw std::invalid_argument("loose_filter needs at least one profile");
    const size_t n = mech.sequence.front().T.size();
    Rng rng(seed);
    for (size_t t = 0; t < profiles; ++t) {
        TypeProfile profile(prior.sample(rng, n));
        for (size_t i = 0; i < n; ++i) {
            const DelayOutcome honest = sequential_unanimous(profile, mech);
            const double u0 = honest.built
                                  ? profile[i] * (1.0 - honest.release_times[i]) - honest.payments[i]
                                  : 0.0;
            const double lie = prior.sample(rng);
            const DelayOutcome dev = sequential_unanimous(profile.with(i, lie), mech);
            const double u1 =
                dev.built ? profile[i] * (1.0 - dev.release_times[i]) - dev.payments[i] : 0.0;
            if (u1 - u0 > 1e-9) return false;
        }
    }
    return true;
}

DelayObjectives delay_objectives(const DelayOutcome& outcome) {
    DelayObjectives obj;
    for (double t : outcome.release_times) {
        obj.max_delay = std::max(obj.max_delay, t);
        obj.sum_delay += t;
    }
    return obj;
}

DelayObjectives expected_delay(const std::function<DelayOutcome(const TypeProfile&)>& mech,
                               const Prior& prior, size_t n, size_t samples, uint64_t seed,
                               int threads) {
    if (samples < 1) throw std::invalid_argument("expected_delay needs at least one sample");
    const int shards = std::max(threads, 1);
    std::vector<DelayObjectives> partial(shards);
    std::vector<size_t> counts(shards, samples / shards);
    for (size_t r = 0; r < samples % shards; ++r) counts[r] += 1;

    const auto run_shard = [&](int s) {
        Rng rng = Rng::stream(seed, static_cast<uint64_t>(s));
        DelayObjectives acc;
        for (size_t t = 0; t < counts[s]; ++t) {
            const DelayObjectives one = delay_objectives(mech(TypeProfile(prior.sample(rng, n))));
            acc.max_delay += one.max_delay;
            acc.sum_delay += one.sum_delay;
        }
        partial[s] = acc;
    };
    if (shards == 1) {
        run_shard(0);
    } else {
        std::vector<std::thread> pool;
        for (int s = 0; s < shards; ++s) pool.emplace_back(run_shard, s);
        for (auto& th : pool) th.join();
    }
    DelayObjectives total;
    for (const auto& p : partial) {
        total.max_delay += p.max_delay;
        total.sum_delay += p.sum_delay;
    }
    total.max_delay /= static_cast<double>(samples);
    total.sum_delay /= static_cast<double>(samples);
    return total;
}

double scs_expected_max_delay(const Prior& prior, size_t n) {
    const double p = prior.upper_mass(1.0 / static_cast<double>(n));
    return 1.0 - std::pow(p, static_cast<double>(n));
}

double payment_ratio(const Prior& prior, double o) {
    if (o < 0.0 || o >= 1.0) throw std::invalid_argument("offer must lie in [0,1)");
    if (o == 0.0) return prior.pdf(prior.lo());
    return prior.cdf(o) / (o * prior.reliability(o));
}

OptimalRatio optimal_ratio(const Prior& prior) {
    constexpr double hi = 1.0 - 1e-6;
    constexpr int grid = 10000;
    OptimalRatio best{payment_ratio(prior, 0.0), 0.0};
    for (int i = 1; i <= grid; ++i) {
        const double o = hi * i / grid;
        const double r = payment_ratio(prior, o);
        if (r < best.r_star) best = {r, o};
    }
    // Golden-section refinement around the grid minimum.
    double a = std::max(0.0, best.o_star - hi / grid);
    double b = std::min(hi, best.o_star + hi / grid);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = payment_ratio(prior, x1), f2 = payment_ratio(prior, x2);
    while (b - a > 1e-8) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a);
            f1 = payment_ratio(prior, x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a);
            f2 = payment_ratio(prior, x2);
        }
    }
    const double o = 0.5 * (a + b);
    const double r = payment_ratio(prior, o);
    if (r < best.r_star) best = {r, o};
    return best;
}

double asymptotic_single_deadline(const Prior& prior, size_t n, double eps) {
    OptimalRatio opt = optimal_ratio(prior);
    const double o = opt.o_star > 0.0 ? opt.o_star : 1e-3;
    const double d = (1.0 + eps) / (static_cast<double>(n) * o * prior.reliability(o));
    return std::clamp(d, 1e-12, 1.0);
}

UtilityFn delay_utility(std::function<DelayOutcome(const TypeProfile&)> mech) {
    return [mech = std::move(mech)](const TypeProfile& reported, size_t agent, double true_value) {
        const DelayOutcome out = mech(reported);
        return true_value * (1.0 - out.release_times[agent]) - out.payments[agent];
    };
}

}  // namespace mech
