#include "mech/dp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

namespace mech {

namespace {

struct Grids {
    std::vector<double> rel;   // P(v >= i/H)
    std::vector<double> util;  // objective weight of a consumer at share i/H
};

Grids make_grids(const Prior& prior, int H, Objective objective) {
    Grids g;
    g.rel.resize(H + 1);
    g.util.resize(H + 1);
    for (int i = 0; i <= H; ++i) {
        const double x = static_cast<double>(i) / H;
        g.rel[i] = prior.upper_mass(x);
        if (objective == Objective::consumers)
            g.util[i] = 1.0;
        else
            g.util[i] = g.rel[i] > 1e-13 ? prior.conditional_welfare(x) : 0.0;
    }
    return g;
}

void parallel_rows(int rows, int threads, const std::function<void(int)>& body) {
    if (threads <= 1) {
        for (int r = 0; r < rows; ++r) body(r);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int r = next.fetch_add(1); r < rows; r = next.fetch_add(1)) body(r);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

DPResult optimal_unanimous(const Prior& prior, int n, const Discretization& disc) {
    const int H = disc.H;
    if (H < 10) throw std::invalid_argument("discretization too coarse (H >= 10)");
    const Grids g = make_grids(prior, H, disc.objective);

    // Two tracks per budget cell: P = probability all agents so far accepted,
    // W = expected objective accumulated along the optimal shares.
    std::vector<double> P(H + 1), W(H + 1);
    for (int m = 0; m <= H; ++m) {
        P[m] = g.rel[m];
        W[m] = g.rel[m] * g.util[m];
    }
    std::vector<std::vector<int>> choice(n + 1);
    for (int k = 2; k <= n; ++k) {
        std::vector<double> P2(H + 1), W2(H + 1);
        choice[k].assign(H + 1, 0);
        for (int m = 0; m <= H; ++m) {
            double best = -1.0;
            int best_c = 0;
            for (int c = 0; c <= m; ++c) {
                const double v = g.rel[c] * (g.util[c] * P[m - c] + W[m - c]);
                if (v > best) {
                    best = v;
                    best_c = c;
                }
            }
            choice[k][m] = best_c;
            P2[m] = g.rel[best_c] * P[m - best_c];
            W2[m] = best;
        }
        P.swap(P2);
        W.swap(W2);
    }

    DPResult result;
    result.value = W[H];
    int m = H;
    for (int k = n; k >= 2; --k) {
        result.policy.push_back(static_cast<double>(choice[k][m]) / H);
        m -= choice[k][m];
    }
    result.policy.push_back(static_cast<double>(m) / H);  // last agent takes the rest
    return result;
}

double optimal_unanimous_literal(const Prior& prior, int n, const Discretization& disc) {
    const int H = disc.H;
    const int U = disc.u_levels > 0 ? disc.u_levels : 64 * H;
    const Grids g = make_grids(prior, H, disc.objective);
    const double u_max = n * g.util[0];
    const double du = u_max > 0.0 ? u_max / U : 1.0;

    // B(1,u,m) = rel(m) * (u + util(m)); one dense (U+1) x (H+1) layer per k.
    std::vector<std::vector<double>> B(U + 1, std::vector<double>(H + 1));
    for (int ui = 0; ui <= U; ++ui)
        for (int mi = 0; mi <= H; ++mi) B[ui][mi] = g.rel[mi] * (ui * du + g.util[mi]);
    for (int k = 2; k <= n; ++k) {
        std::vector<std::vector<double>> next(U + 1, std::vector<double>(H + 1));
        for (int ui = 0; ui <= U; ++ui) {
            for (int mi = 0; mi <= H; ++mi) {
                double best = 0.0;
                for (int c = 0; c <= mi; ++c) {
                    const int uj =
                        std::min(U, static_cast<int>(std::lround((ui * du + g.util[c]) / du)));
                    best = std::max(best, g.rel[c] * B[uj][mi - c]);
                }
                next[ui][mi] = best;
            }
        }
        B.swap(next);
    }
    return B[0][H];
}

double welfare_partition(const Prior& prior, int t, int H, Objective objective) {
    if (t < 1) throw std::invalid_argument("coalition size must be positive");
    if (objective == Objective::consumers) return static_cast<double>(t);
    const Grids g = make_grids(prior, H, objective);
    std::vector<double> V(g.util);  // one agent paying m/H contributes w(m/H)
    for (int level = 2; level <= t; ++level) {
        std::vector<double> next(H + 1);
        for (int m = 0; m <= H; ++m) {
            double best = -1e300;
            for (int c = 0; c <= m; ++c) best = std::max(best, g.util[c] + V[m - c]);
            next[m] = best;
        }
        V.swap(next);
    }
    return V[H];
}

double excludable_upper_bound(const Prior& prior, int n, const Discretization& disc) {
    const int H = disc.H;
    const int L = disc.l_cap > 0 ? disc.l_cap : H;  // lower-bound axis, clamped
    const Grids g = make_grids(prior, H, disc.objective);

    std::vector<double> G(n + 1, 0.0);
    for (int t = 1; t <= n; ++t) G[t] = welfare_partition(prior, t, H, disc.objective);

    using Layer = std::vector<std::vector<double>>;  // [money][lower bound]
    const auto zeros = [&] { return Layer(H + 1, std::vector<double>(L + 1, 0.0)); };

    // R[t] = U(t,t, m=1, l), the restart row entered after a rejection.
    std::vector<std::vector<double>> restart(n + 1, std::vector<double>(L + 1, 0.0));
    for (int t = 2; t <= n; ++t) {
        const std::vector<double>& R = restart[t - 1];
        // Base k=1: offer the whole remaining budget to the last agent.
        Layer layer = zeros();
        for (int mi = 0; mi <= H; ++mi) {
            for (int li = 0; li <= L; ++li) {
                const double fl = li <= H ? g.rel[li] : 0.0;
                const double p = fl > 0.0 ? std::min(g.rel[mi] / fl, 1.0) : 0.0;
                layer[mi][li] = p * G[t] + (1.0 - p) * R[std::min(H - mi, L)];
            }
        }
        for (int k = 2; k <= t; ++k) {
            Layer cur = zeros();
            const Layer& prev = layer;
            parallel_rows(H + 1, disc.threads, [&](int mi) {
                for (int li = 0; li <= L; ++li) {
                    double best = 0.0;
                    const int ls_max = std::min({li, H, mi});
                    for (int ls = 0; ls <= ls_max; ++ls) {
                        const double fl = g.rel[ls];
                        if (fl <= 0.0) continue;
                        for (int cs = ls; cs <= mi; ++cs) {
                            const double p = std::min(g.rel[cs] / fl, 1.0);
                            const int ri = std::min(H - mi + li - ls, L);
                            const double v = p * prev[mi - cs][li - ls] + (1.0 - p) * R[ri];
                            if (v > best) best = v;
                        }
                    }
                    cur[mi][li] = best;
                }
            });
            layer.swap(cur);
        }
        restart[t] = layer[H];
    }
    return restart[n][0];
}

DPResult one_directional_offers(const Prior& prior, int n, int H, Objective objective) {
    const Grids g = make_grids(prior, H, objective);
    // State: (agents left, money still needed). The objective realizes only
    // when the full cost is raised, so each acceptance of share c contributes
    // util(c) weighted by the completion probability of the remaining play.
    std::vector<double> P(H + 1, 0.0), W(H + 1, 0.0);
    P[0] = 1.0;
    int first_offer = 0;
    for (int j = 1; j <= n; ++j) {
        std::vector<double> P2(H + 1), W2(H + 1);
        for (int mi = 0; mi <= H; ++mi) {
            double best = -1e300, best_p = 0.0;
            int best_c = 0;
            for (int c = 0; c <= H; ++c) {
                const int rest = std::max(mi - c, 0);
                const double accept = g.rel[c];
                const double v = accept * (g.util[c] * P[rest] + W[rest]) +
                                 (1.0 - accept) * W[mi];
                if (v > best) {
                    best = v;
                    best_c = c;
                    best_p = accept * P[rest] + (1.0 - accept) * P[mi];
                }
            }
            W2[mi] = best;
            P2[mi] = best_p;
            if (j == n && mi == H) first_offer = best_c;
        }
        P.swap(P2);
        W.swap(W2);
    }
    DPResult result;
    result.value = W[H];
    result.policy = {static_cast<double>(first_offer) / H};
    return result;
}

}  // namespace mech
