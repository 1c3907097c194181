// Numerical baseline: maximizes arbitrage profit subject to the trading
// function inequality with an annealed log-barrier and projected gradient
// ascent, plus a dense grid-search oracle for small pools.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "closed_form.hpp"
#include "core.hpp"
#include "signature_search.hpp"

namespace g3arb {

struct SolverConfig {
    int max_iterations = 5000;
    double step_size = 0.1;        // initial step as a fraction of reserves
    double penalty_weight = 1e-2;  // initial barrier weight relative to pool value
    double convergence_tol = 1e-9;
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iterations <= 0) throw std::invalid_argument("solver: max_iterations must be positive");
        if (!(step_size > 0.0)) throw std::invalid_argument("solver: step_size must be positive");
        if (!(penalty_weight > 0.0)) throw std::invalid_argument("solver: penalty_weight must be positive");
        if (!(convergence_tol >= 1e-12)) throw std::invalid_argument("solver: convergence_tol must be >= 1e-12");
    }
};

struct NumericalSolution {
    TradeSolution trade;
    bool converged = true;
    int iterations = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4b9f9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Scales the net trade along its ray onto the invariant level set (or to the
// largest feasible multiple inside the box of positive reserves). Profit is
// linear in the scale, so this only ever improves a profitable direction.
// Along the ray, g(t) = sum w ln(1 + t gamma^d phi / nu R) is concave with
// g(0) = 0, so the positive root is unique when it exists. Returns false
// when no feasible positive scale exists; phi is then untouched.
inline bool project_to_level_set(const PoolState& pool, std::vector<double>& phi) {
    const std::size_t n = pool.size();
    const double nu = pool.amplification;
    const double gamma = pool.fee_gamma;

    auto g_of = [&](double t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (phi[i] == 0.0) continue;
            const double gd = phi[i] > 0.0 ? gamma : 1.0;
            const double x = t * gd * phi[i] / (nu * pool.reserves[i]);
            if (x <= -1.0) return -std::numeric_limits<double>::infinity();
            acc += pool.weights[i] * std::log1p(x);
        }
        return acc;
    };

    double t_max = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (phi[i] < 0.0) {
            // stay within both virtual and real reserves
            t_max = std::min(t_max, nu * pool.reserves[i] / -phi[i]);
            t_max = std::min(t_max, pool.reserves[i] / -phi[i]);
        }
    if (!std::isfinite(t_max)) return false;  // nothing flows out
    t_max *= 1.0 - 1e-12;

    double lo = std::min(1.0, 0.5 * t_max);
    while (lo > 1e-9 && g_of(lo) <= 0.0) lo *= 0.5;
    if (g_of(lo) <= 0.0) return false;

    double hi = t_max;
    if (g_of(hi) >= 0.0) {
        lo = hi;  // level set unreachable inside the box; take the cap
    } else {
        while (hi - lo > 1e-15 * hi) {
            const double mid = 0.5 * (lo + hi);
            (g_of(mid) >= 0.0 ? lo : hi) = mid;
        }
    }
    for (std::size_t i = 0; i < n; ++i) phi[i] *= lo;
    return true;
}

}  // namespace detail

// Projected gradient ascent on (delta, lambda) >= 0 for
//   max sum m (lambda - delta)  s.t.  prod (nu R + gamma delta - lambda)^w >= nu k,
// the constraint enforced through ln-space and an annealed log-barrier.
// Returns the best feasible iterate, netted per token and scaled onto the
// level set; the zero trade when nothing profitable was certified.
inline NumericalSolution solve_numerical(const PoolState& pool, const MarketPrices& prices,
                                         const SolverConfig& cfg = {}) {
    pool.validate();
    prices.validate();
    cfg.validate();
    if (prices.size() != pool.size())
        throw std::invalid_argument("solve_numerical: prices/pool dimension mismatch");

    const std::size_t n = pool.size();
    const double nu = pool.amplification;
    const double gamma = pool.fee_gamma;
    const auto& r = pool.reserves;
    const auto& w = pool.weights;
    const auto& m = prices.prices;

    double log_k_nu = 0.0;  // sum w ln(nu R)
    double pool_value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        log_k_nu += w[i] * std::log(nu * r[i]);
        pool_value += m[i] * nu * r[i];
    }

    // x = (delta..., lambda...)
    std::vector<double> x(2 * n, 0.0), trial(2 * n), grad(2 * n);

    auto constraint = [&](const std::vector<double>& v) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = nu * r[i] + gamma * v[i] - v[n + i];
            if (c <= 0.0) return -std::numeric_limits<double>::infinity();
            acc += w[i] * std::log(c);
        }
        return acc - log_k_nu;
    };
    auto profit_of = [&](const std::vector<double>& v) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += m[i] * (v[n + i] - v[i]);
        return acc;
    };

    // Feasible start: a small seeded inward-only jitter keeps g strictly positive.
    std::mt19937_64 rng(detail::splitmix64(cfg.seed));
    std::uniform_real_distribution<double> uni(0.5, 1.5);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1e-8 * r[i] * uni(rng);

    std::vector<double> best_x = x;
    double best_profit = profit_of(x);

    const int rounds = std::max(1, static_cast<int>(std::ceil(
        std::log10(cfg.penalty_weight / cfg.convergence_tol))) + 1);
    const int barrier_budget = std::max(1, cfg.max_iterations * 3 / 5);
    const int budget_per_round = std::max(1, barrier_budget / rounds);

    int used_iterations = 0;
    bool converged = true;
    double mu = cfg.penalty_weight * pool_value;
    const double mu_min = cfg.convergence_tol * pool_value;

    for (int round = 0; round < rounds; ++round) {
        double g = constraint(x);
        double objective = profit_of(x) + mu * std::log(g);
        double step = cfg.step_size;
        int flat_streak = 0;
        int iter = 0;
        for (; iter < budget_per_round; ++iter) {
            const double barrier = mu / g;
            double gnorm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = nu * r[i] + gamma * x[i] - x[n + i];
                // gradients in reserve-scaled coordinates
                grad[i] = r[i] * (-m[i] + barrier * w[i] * gamma / c);
                grad[n + i] = r[i] * (m[i] - barrier * w[i] / c);
                if (x[i] == 0.0 && grad[i] < 0.0) grad[i] = 0.0;
                if (x[n + i] == 0.0 && grad[n + i] < 0.0) grad[n + i] = 0.0;
                gnorm = std::max({gnorm, std::abs(grad[i]), std::abs(grad[n + i])});
            }
            if (gnorm == 0.0) break;

            bool accepted = false;
            for (int bt = 0; bt < 30 && !accepted; ++bt) {
                const double scale = step / gnorm;
                for (std::size_t i = 0; i < 2 * n; ++i)
                    trial[i] = std::max(0.0, x[i] + scale * grad[i]);
                const double g_trial = constraint(trial);
                if (g_trial > 0.0) {
                    const double obj_trial = profit_of(trial) + mu * std::log(g_trial);
                    if (obj_trial > objective) {
                        x = trial;
                        g = g_trial;
                        const double gain = obj_trial - objective;
                        objective = obj_trial;
                        const double p = profit_of(x);
                        if (p > best_profit) {
                            best_profit = p;
                            best_x = x;
                        }
                        flat_streak = gain < 1e-12 * (1.0 + std::abs(objective)) ? flat_streak + 1 : 0;
                        step = std::min(step * 1.5, 1e3 * cfg.step_size);
                        accepted = true;
                    }
                }
                if (!accepted) step *= 0.5;
            }
            if (!accepted || step < 1e-16 || flat_streak >= 5) break;
        }
        used_iterations += iter;
        if (mu <= mu_min) break;
        mu = std::max(mu * 0.1, mu_min);
    }

    NumericalSolution result;
    result.iterations = used_iterations;
    result.converged = converged;

    if (!(best_profit > 0.0)) {
        result.trade = TradeSolution::no_trade(n);
        return result;
    }

    // Net the legs, then ride the ray onto the level set.
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) {
        phi[i] = best_x[i] - best_x[n + i];
        if (std::abs(phi[i]) <= kSignZeroTol * r[i]) phi[i] = 0.0;
    }
    if (!detail::project_to_level_set(pool, phi)) {
        result.trade = TradeSolution::no_trade(n);
        return result;
    }

    // Boundary walk: ascend the profit along the level set's tangent plane,
    // re-projecting each trial back onto the set. Profit restricted to the
    // set is concave, so accepted steps converge to the constrained optimum.
    {
        auto profit_phi = [&](const std::vector<double>& v) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc -= m[i] * v[i];
            return acc;
        };
        double p_cur = profit_phi(phi);
        std::vector<double> dir(n), cand(n);
        double step = cfg.step_size;
        int flat_streak = 0;
        const int walk_budget = std::max(1, cfg.max_iterations - barrier_budget);
        int iter = 0;
        for (; iter < walk_budget; ++iter) {
            double dot_pg = 0.0, dot_gg = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double gd = phi[i] > 0.0 ? gamma : 1.0;
                const double c = nu * r[i] + gd * phi[i];
                const double gp = -m[i] * r[i];              // d profit / d (phi_i / R_i)
                const double gg = r[i] * w[i] * gd / c;       // d constraint / d (phi_i / R_i)
                dir[i] = gp;
                cand[i] = gg;  // reuse as scratch for the constraint gradient
                dot_pg += gp * gg;
                dot_gg += gg * gg;
            }
            const double lam = dot_pg / dot_gg;
            double norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dir[i] -= lam * cand[i];
                norm = std::max(norm, std::abs(dir[i]));
            }
            if (norm == 0.0) break;

            bool accepted = false;
            for (int bt = 0; bt < 25 && !accepted; ++bt) {
                for (std::size_t i = 0; i < n; ++i)
                    cand[i] = phi[i] + step * r[i] * dir[i] / norm;
                if (detail::project_to_level_set(pool, cand)) {
                    const double p_new = profit_phi(cand);
                    if (p_new > p_cur) {
                        flat_streak = p_new - p_cur < 1e-14 * (1.0 + std::abs(p_cur)) ? flat_streak + 1 : 0;
                        phi.swap(cand);
                        p_cur = p_new;
                        step = std::min(step * 1.4, 1e3 * cfg.step_size);
                        accepted = true;
                    }
                }
                if (!accepted) step *= 0.5;
            }
            if (!accepted || step < 1e-15 || flat_streak >= 5) {
                ++iter;
                break;
            }
        }
        result.iterations += iter;
        if (iter == walk_budget) result.converged = false;
    }

    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(phi[i]) <= kSignZeroTol * r[i]) phi[i] = 0.0;

    TradeSignature sig = TradeSignature::none(n);
    for (std::size_t i = 0; i < n; ++i)
        sig.entries[i] = phi[i] > 0.0 ? 1 : (phi[i] < 0.0 ? -1 : 0);
    if (!sig.tradeable()) {
        result.trade = TradeSolution::no_trade(n);
        return result;
    }
    TradeSolution sol = detail::finalize_solution(pool, prices, std::move(sig), std::move(phi));
    if (!(sol.profit > 0.0)) {
        result.trade = TradeSolution::no_trade(n);
        return result;
    }
    result.trade = std::move(sol);
    return result;
}

struct GridOracleOptions {
    int grid_points = 2001;     // total points per signature grid
    double box_fraction = 0.5;  // search box |phi_i| <= box_fraction * R_i
    int refinements = 0;        // extra sweeps shrunk around the best cell
};

// Dense grid-search oracle for N <= 3. For every signature, the free trade
// dimensions (|A| - 1 after imposing the invariant equality on the last
// active token) are discretized over the box; the last token is solved by
// one-dimensional bisection on the reduced invariant. Independent of the
// closed-form algebra; used as the external referee for it.
inline TradeSolution solve_grid_oracle(const PoolState& pool, const MarketPrices& prices,
                                       const GridOracleOptions& opts = {}) {
    pool.validate();
    prices.validate();
    const int n = static_cast<int>(pool.size());
    if (prices.size() != pool.size())
        throw std::invalid_argument("solve_grid_oracle: prices/pool dimension mismatch");
    if (n > 3) throw std::invalid_argument("solve_grid_oracle: only N <= 3 supported");
    if (opts.grid_points < 3 || opts.grid_points > 2001)
        throw std::invalid_argument("solve_grid_oracle: grid_points must lie in [3, 2001]");
    if (!(opts.box_fraction > 0.0) || opts.box_fraction >= 1.0)
        throw std::invalid_argument("solve_grid_oracle: box_fraction must lie in (0,1)");

    const double nu = pool.amplification;
    const double gamma = pool.fee_gamma;

    double best_profit = 0.0;
    std::vector<double> best_phi;
    TradeSignature best_sig;

    std::int8_t sig[3];
    const std::uint64_t total = detail::pow3(n);
    for (std::uint64_t code = 0; code < total; ++code) {
        if (!detail::decode_signature(code, n, sig)) continue;

        std::vector<std::size_t> active;
        double w_active = 0.0;
        for (int i = 0; i < n; ++i)
            if (sig[i] != 0) {
                active.push_back(i);
                w_active += pool.weights[i];
            }
        const std::size_t last = active.back();
        const std::vector<std::size_t> free_dims(active.begin(), active.end() - 1);
        const std::size_t nf = free_dims.size();  // 1 or 2

        const int g_per_dim = nf == 1 ? opts.grid_points
                                      : static_cast<int>(std::sqrt(static_cast<double>(opts.grid_points)));

        auto wb = [&](std::size_t i) { return pool.weights[i] / w_active; };
        auto leg_log = [&](std::size_t i, double phi_i) {
            const double gd = sig[i] > 0 ? gamma : 1.0;
            const double xr = gd * phi_i / (nu * pool.reserves[i]);
            if (xr <= -1.0) return -std::numeric_limits<double>::infinity();
            return wb(i) * std::log1p(xr);
        };

        // Solve the last active token from the reduced invariant by bisection.
        auto solve_last = [&](double fixed_sum, double& phi_last) {
            const double box = opts.box_fraction * pool.reserves[last];
            double lo, hi;
            if (sig[last] > 0) {
                if (!(fixed_sum < 0.0)) return false;  // root would be nonpositive
                lo = 0.0;
                hi = box;
                if (!(fixed_sum + leg_log(last, hi) > 0.0)) return false;  // outside box
            } else {
                if (!(fixed_sum > 0.0)) return false;
                lo = -box;
                hi = 0.0;
                if (!(fixed_sum + leg_log(last, lo) < 0.0)) return false;
            }
            for (int it = 0; it < 100 && (hi - lo) > 1e-15 * pool.reserves[last]; ++it) {
                const double mid = 0.5 * (lo + hi);
                (fixed_sum + leg_log(last, mid) < 0.0 ? lo : hi) = mid;
            }
            phi_last = 0.5 * (lo + hi);
            return std::abs(phi_last) > kSignZeroTol * pool.reserves[last];
        };

        // One sweep over the (possibly shrunk) per-dim intervals; returns the
        // best point found, or false if no sign-consistent profitable point.
        struct Interval { double a, b; };
        auto sweep = [&](const std::vector<Interval>& box, std::vector<double>& out_point,
                         double& out_profit, double& out_last) {
            bool found = false;
            std::vector<double> point(nf);
            auto eval_point = [&]() {
                double fixed_sum = 0.0;
                for (std::size_t k = 0; k < nf; ++k) {
                    const double ll = leg_log(free_dims[k], point[k]);
                    if (!std::isfinite(ll)) return;
                    fixed_sum += ll;
                }
                double phi_last;
                if (!solve_last(fixed_sum, phi_last)) return;
                double profit = -prices.prices[last] * phi_last;
                for (std::size_t k = 0; k < nf; ++k)
                    profit -= prices.prices[free_dims[k]] * point[k];
                if (profit > out_profit) {
                    out_profit = profit;
                    out_point = point;
                    out_last = phi_last;
                    found = true;
                }
            };
            if (nf == 1) {
                for (int a = 0; a < g_per_dim; ++a) {
                    point[0] = box[0].a + (box[0].b - box[0].a) * a / (g_per_dim - 1);
                    eval_point();
                }
            } else {
                for (int a = 0; a < g_per_dim; ++a) {
                    point[0] = box[0].a + (box[0].b - box[0].a) * a / (g_per_dim - 1);
                    for (int b = 0; b < g_per_dim; ++b) {
                        point[1] = box[1].a + (box[1].b - box[1].a) * b / (g_per_dim - 1);
                        eval_point();
                    }
                }
            }
            return found;
        };

        // Initial signed boxes exclude zero by one cell.
        std::vector<Interval> box(nf);
        for (std::size_t k = 0; k < nf; ++k) {
            const std::size_t i = free_dims[k];
            const double extent = opts.box_fraction * pool.reserves[i];
            const double cell = extent / g_per_dim;
            if (sig[i] > 0) box[k] = {cell, extent};
            else box[k] = {-extent, -cell};
        }

        std::vector<double> sig_point(nf);
        double sig_profit = 0.0;
        double sig_last = 0.0;
        if (!sweep(box, sig_point, sig_profit, sig_last)) continue;

        // Profit over the free dims is concave on the level set, so the best
        // coarse cell is within one cell of the optimum; +-1.5 gives margin.
        for (int ref = 0; ref < opts.refinements; ++ref) {
            std::vector<Interval> shrunk(nf);
            for (std::size_t k = 0; k < nf; ++k) {
                const std::size_t i = free_dims[k];
                const double cell = (box[k].b - box[k].a) / (g_per_dim - 1);
                double a = sig_point[k] - 1.5 * cell;
                double b = sig_point[k] + 1.5 * cell;
                // keep the sign of the leg and stay inside the original box
                const double floor_mag = 1e-12 * pool.reserves[i];
                if (sig[i] > 0) {
                    a = std::max(a, floor_mag);
                    b = std::min(b, opts.box_fraction * pool.reserves[i]);
                } else {
                    b = std::min(b, -floor_mag);
                    a = std::max(a, -opts.box_fraction * pool.reserves[i]);
                }
                shrunk[k] = {a, b};
            }
            box = shrunk;
            sweep(box, sig_point, sig_profit, sig_last);
        }

        if (sig_profit > best_profit) {
            best_profit = sig_profit;
            best_phi.assign(n, 0.0);
            for (std::size_t k = 0; k < nf; ++k) best_phi[free_dims[k]] = sig_point[k];
            best_phi[last] = sig_last;
            best_sig = TradeSignature{std::vector<std::int8_t>(sig, sig + n)};
        }
    }

    if (best_phi.empty()) return TradeSolution::no_trade(pool.size());
    return detail::finalize_solution(pool, prices, std::move(best_sig), std::move(best_phi));
}

inline TradeSolution solve_grid_oracle(const PoolState& pool, const MarketPrices& prices,
                                       int grid_points) {
    GridOracleOptions opts;
    opts.grid_points = grid_points;
    return solve_grid_oracle(pool, prices, opts);
}

}  // namespace g3arb
