// Simulation protocols: independent synthetic arbitrage trials and the
// duelling-arbitrageurs sequential backtest, with price-series ingestion.
#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "baseline.hpp"
#include "core.hpp"
#include "signature_search.hpp"

namespace g3arb {

// ---------------------------------------------------------------- trials

struct TrialConfig {
    int n_tokens = 3;
    int n_trials = 5000;
    double v0 = 1e6;             // initial pool value in the numeraire
    double shock_scale = 0.05;   // a in m* = m + a u
    double fee_gamma = 0.95;     // 5% fee
    double weight_jitter = 0.05; // absolute deviation from 1/N before renormalising
    std::uint64_t seed = 0;
    SolverConfig solver{};

    void validate() const {
        if (n_tokens < 2 || n_tokens > kMaxEnumerateTokens)
            throw std::invalid_argument("trials: n_tokens must lie in [2," +
                                        std::to_string(kMaxEnumerateTokens) + "]");
        if (n_trials < 1) throw std::invalid_argument("trials: n_trials must be >= 1");
        if (!(v0 > 0.0)) throw std::invalid_argument("trials: v0 must be positive");
        if (!(shock_scale >= 0.0)) throw std::invalid_argument("trials: shock_scale must be >= 0");
        if (!(fee_gamma > 0.0) || fee_gamma > 1.0)
            throw std::invalid_argument("trials: fee_gamma must lie in (0,1]");
        if (!(weight_jitter >= 0.0) || weight_jitter >= 1.0 / n_tokens)
            throw std::invalid_argument("trials: weight_jitter must lie in [0, 1/n_tokens) "
                                        "so jittered weights stay in (0,1)");
        solver.validate();
    }
};

struct TrialRecord {
    int trial_id = 0;
    double closed_form_profit = 0.0;
    double baseline_profit = 0.0;
    double profit_gap = 0.0;  // closed_form_profit - baseline_profit
    double closed_form_time_s = 0.0;
    double baseline_time_s = 0.0;
    bool baseline_converged = true;
    std::string error;  // nonempty when a solver threw; the batch carries on
};

namespace detail {

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1)));
}

}  // namespace detail

// One synthetic opportunity: a pool at equilibrium against pre-shock prices
// m ~ U(0,1)^N with reserves R = V0 w / m, then shocked prices m* = m + a u.
// Deterministic in (cfg.seed, trial_id).
inline std::pair<PoolState, MarketPrices> generate_trial(const TrialConfig& cfg, int trial_id) {
    cfg.validate();
    auto rng = detail::trial_rng(cfg.seed, static_cast<std::uint64_t>(trial_id));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n = cfg.n_tokens;

    std::vector<double> w(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
        w[i] = 1.0 / n + cfg.weight_jitter * (2.0 * uni(rng) - 1.0);
        wsum += w[i];
    }
    for (int i = 0; i < n; ++i) w[i] /= wsum;

    std::vector<double> m(n), r(n);
    for (int i = 0; i < n; ++i) {
        do {
            m[i] = uni(rng);
        } while (m[i] <= 1e-12);
        r[i] = cfg.v0 * w[i] / m[i];
    }
    std::vector<double> shocked(n);
    for (int i = 0; i < n; ++i) shocked[i] = m[i] + cfg.shock_scale * uni(rng);

    PoolState pool{std::move(r), std::move(w), cfg.fee_gamma, 1.0};
    pool.validate();
    return {std::move(pool), MarketPrices{std::move(shocked)}};
}

// Runs closed-form search and the numerical baseline on the same instances,
// recording profits and wall times. Trials are independent and run
// data-parallel; output is ordered by trial_id and bit-identical for a given
// seed regardless of thread count.
inline std::vector<TrialRecord> run_trials(const TrialConfig& cfg, unsigned threads = 0) {
    cfg.validate();
    std::vector<TrialRecord> records(cfg.n_trials);

    auto worker_body = [&](int id) {
        TrialRecord& rec = records[id];
        rec.trial_id = id;
        try {
            auto [pool, prices] = generate_trial(cfg, id);

            const auto t0 = std::chrono::steady_clock::now();
            const auto closed = find_best_trade(pool, prices, SearchOptions{.threads = 1});
            const auto t1 = std::chrono::steady_clock::now();

            SolverConfig solver = cfg.solver;
            solver.seed = detail::splitmix64(cfg.seed ^ (static_cast<std::uint64_t>(id) + 0x51ed2701));
            const auto t2 = std::chrono::steady_clock::now();
            const auto baseline = solve_numerical(pool, prices, solver);
            const auto t3 = std::chrono::steady_clock::now();

            rec.closed_form_profit = closed.best.profit;
            rec.baseline_profit = baseline.trade.profit;
            rec.profit_gap = rec.closed_form_profit - rec.baseline_profit;
            rec.closed_form_time_s = std::chrono::duration<double>(t1 - t0).count();
            rec.baseline_time_s = std::chrono::duration<double>(t3 - t2).count();
            rec.baseline_converged = baseline.converged;
        } catch (const std::exception& e) {
            rec.error = e.what();
            rec.closed_form_profit = rec.baseline_profit = rec.profit_gap =
                std::numeric_limits<double>::quiet_NaN();
        }
    };

    unsigned t = threads == 0 ? detail::ThreadPool::default_threads() : threads;
    t = std::min<unsigned>(t, static_cast<unsigned>(cfg.n_trials));
    if (t <= 1) {
        for (int id = 0; id < cfg.n_trials; ++id) worker_body(id);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(t);
        for (unsigned k = 0; k < t; ++k)
            pool.emplace_back([&] {
                for (int id = next.fetch_add(1); id < cfg.n_trials; id = next.fetch_add(1))
                    worker_body(id);
            });
        for (auto& th : pool) th.join();
    }
    return records;
}

// ----------------------------------------------------------- price series

struct PriceSeries {
    std::vector<double> timestamps;
    std::vector<std::vector<double>> prices;  // [step][token]

    std::size_t steps() const { return timestamps.size(); }
    std::size_t tokens() const { return prices.empty() ? 0 : prices.front().size(); }

    MarketPrices at(std::size_t step) const { return MarketPrices{prices.at(step)}; }

    void validate() const {
        if (timestamps.empty() || prices.size() != timestamps.size())
            throw std::invalid_argument("price series: empty or inconsistent row count");
        const std::size_t n = prices.front().size();
        if (n < 2) throw std::invalid_argument("price series: need at least 2 tokens");
        for (std::size_t t = 0; t < prices.size(); ++t) {
            if (prices[t].size() != n)
                throw std::invalid_argument("price series: ragged row at step " + std::to_string(t));
            for (double p : prices[t])
                if (!(p > 0.0)) throw std::invalid_argument("price series: nonpositive price at step " +
                                                            std::to_string(t));
            if (t > 0 && !(timestamps[t] > timestamps[t - 1]))
                throw std::invalid_argument("price series: timestamps not strictly increasing at step " +
                                            std::to_string(t));
        }
    }
};

// Loads "timestamp,token_0,...,token_{N-1}" CSV. Malformed rows, non-monotone
// timestamps and nonpositive prices are reported with their line number.
inline PriceSeries load_price_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("price series: cannot open '" + path + "'");

    auto fail = [&](std::size_t line, const std::string& what) {
        throw std::runtime_error("price series: " + path + ":" + std::to_string(line) + ": " + what);
    };
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string field;
        while (std::getline(ss, field, ',')) {
            const auto b = field.find_first_not_of(" \t\r");
            const auto e = field.find_last_not_of(" \t\r");
            out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
        }
        return out;
    };

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) fail(1, "empty file");
    ++line_no;
    const auto header = split(line);
    if (header.size() < 3 || header[0] != "timestamp")
        fail(line_no, "expected header 'timestamp,token_0,...'");
    const std::size_t n = header.size() - 1;

    PriceSeries series;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split(line);
        if (fields.size() != n + 1)
            fail(line_no, "expected " + std::to_string(n + 1) + " fields, got " +
                              std::to_string(fields.size()));
        std::vector<double> row(n);
        double ts;
        try {
            std::size_t used = 0;
            ts = std::stod(fields[0], &used);
            if (used != fields[0].size()) throw std::invalid_argument("");
            for (std::size_t i = 0; i < n; ++i) {
                row[i] = std::stod(fields[i + 1], &used);
                if (used != fields[i + 1].size()) throw std::invalid_argument("");
            }
        } catch (const std::exception&) {
            fail(line_no, "unparsable number");
        }
        if (!series.timestamps.empty() && !(ts > series.timestamps.back()))
            fail(line_no, "timestamp not strictly increasing");
        for (std::size_t i = 0; i < n; ++i)
            if (!(row[i] > 0.0)) fail(line_no, "nonpositive price for token_" + std::to_string(i));
        series.timestamps.push_back(ts);
        series.prices.push_back(std::move(row));
    }
    if (series.timestamps.empty()) fail(line_no, "no data rows");
    return series;
}

// Seeded multivariate geometric random walk, drift-compensated so each token
// is a martingale in expectation.
inline PriceSeries synthetic_walk(int n_tokens, int steps, double volatility, std::uint64_t seed,
                                  std::vector<double> initial = {}) {
    if (n_tokens < 2) throw std::invalid_argument("synthetic_walk: need at least 2 tokens");
    if (steps < 1) throw std::invalid_argument("synthetic_walk: need at least 1 step");
    if (!(volatility >= 0.0)) throw std::invalid_argument("synthetic_walk: volatility must be >= 0");
    if (initial.empty()) initial.assign(n_tokens, 1.0);
    if (initial.size() != static_cast<std::size_t>(n_tokens))
        throw std::invalid_argument("synthetic_walk: initial prices length mismatch");

    std::mt19937_64 rng(detail::splitmix64(seed));
    std::normal_distribution<double> gauss(0.0, 1.0);

    PriceSeries series;
    series.timestamps.reserve(steps);
    series.prices.reserve(steps);
    std::vector<double> p = std::move(initial);
    for (int t = 0; t < steps; ++t) {
        series.timestamps.push_back(static_cast<double>(t));
        series.prices.push_back(p);
        for (int i = 0; i < n_tokens; ++i)
            p[i] *= std::exp(volatility * gauss(rng) - 0.5 * volatility * volatility);
    }
    series.validate();
    return series;
}

// Pool at equilibrium against the given prices: R = V0 w / m, so quoted and
// market prices coincide before the first step.
inline PoolState equilibrium_pool(const MarketPrices& prices, std::vector<double> weights,
                                  double v0, double fee_gamma, double amplification = 1.0) {
    std::vector<double> r(prices.size());
    for (std::size_t i = 0; i < prices.size(); ++i)
        r[i] = v0 * weights.at(i) / prices.prices[i];
    PoolState pool{std::move(r), std::move(weights), fee_gamma, amplification};
    pool.validate();
    return pool;
}

// ------------------------------------------------------------------ duel

enum class ArbAlgo { ClosedForm, Baseline, None };

inline const char* to_string(ArbAlgo a) {
    switch (a) {
        case ArbAlgo::ClosedForm: return "closed";
        case ArbAlgo::Baseline: return "baseline";
        default: return "none";
    }
}

struct DuelConfig {
    ArbAlgo first = ArbAlgo::Baseline;  // priority arbitrageur, trades first each step
    ArbAlgo second = ArbAlgo::ClosedForm;
    SolverConfig solver{};
    unsigned search_threads = 1;
    bool record_trades = false;  // keep executed phi vectors for accounting checks
};

struct DuelRecord {
    std::size_t step = 0;
    double arb_a_profit = 0.0;  // cumulative, fraction of initial pool value
    double arb_b_profit = 0.0;
    std::vector<double> pool_reserves_after;
};

struct DuelResult {
    std::vector<DuelRecord> records;
    ArbAlgo first = ArbAlgo::Baseline;
    ArbAlgo second = ArbAlgo::ClosedForm;
    double initial_pool_value = 0.0;
    std::size_t trades_a = 0;
    std::size_t trades_b = 0;
    double final_a_profit = 0.0;  // numeraire units
    double final_b_profit = 0.0;
    // populated when record_trades is set: executed phi per (step, slot), empty when skipped
    std::vector<std::array<std::vector<double>, 2>> step_trades;
};

// Sequential backtest: at each price update the priority arbitrageur computes
// and, if the pool would accept it at a profit, executes its trade against the
// live reserves (R <- R + gamma delta - lambda); then the second does the
// same against the updated state. Cumulative profits are tracked in the
// numeraire as fractions of the initial pool value.
inline DuelResult run_duel(const PriceSeries& series, PoolState pool, const DuelConfig& cfg = {}) {
    series.validate();
    pool.validate();
    cfg.solver.validate();
    if (series.tokens() != pool.size())
        throw std::invalid_argument("run_duel: series token count does not match pool");

    const std::size_t n = pool.size();
    DuelResult result;
    result.first = cfg.first;
    result.second = cfg.second;
    for (std::size_t i = 0; i < n; ++i)
        result.initial_pool_value += series.prices[0][i] * pool.reserves[i];

    // Pool acceptance: post-trade reserves positive and the raw invariant not
    // decreased (up to 1e-9 relative slack for round-off on the level set).
    auto pool_accepts = [&](const TradeSolution& sol) {
        double before = 0.0, after = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double gd = sol.phi[i] > 0.0 ? pool.fee_gamma : 1.0;
            const double c = pool.amplification * pool.reserves[i] + gd * sol.phi[i];
            if (c <= 0.0 || pool.reserves[i] + gd * sol.phi[i] <= 0.0) return false;
            before += pool.weights[i] * std::log(pool.amplification * pool.reserves[i]);
            after += pool.weights[i] * std::log(c);
        }
        return after >= before - 1e-9;
    };

    auto execute = [&](const TradeSolution& sol) {
        for (std::size_t i = 0; i < n; ++i) {
            const double gd = sol.phi[i] > 0.0 ? pool.fee_gamma : 1.0;
            pool.reserves[i] += gd * sol.phi[i];
        }
    };

    double cum_a = 0.0, cum_b = 0.0;
    result.records.reserve(series.steps());
    if (cfg.record_trades) result.step_trades.resize(series.steps());

    for (std::size_t t = 0; t < series.steps(); ++t) {
        const MarketPrices m{series.prices[t]};
        const std::array<ArbAlgo, 2> order{cfg.first, cfg.second};
        for (int slot = 0; slot < 2; ++slot) {
            const ArbAlgo algo = order[slot];
            if (algo == ArbAlgo::None) continue;

            TradeSolution sol;
            if (algo == ArbAlgo::ClosedForm) {
                sol = find_best_trade(pool, m, SearchOptions{.threads = cfg.search_threads}).best;
            } else {
                SolverConfig solver = cfg.solver;
                solver.seed = detail::splitmix64(cfg.solver.seed ^ (t * 2 + slot + 0x7f4a));
                sol = solve_numerical(pool, m, solver).trade;
            }
            if (!sol.valid || !(sol.profit > 0.0) || !pool_accepts(sol)) continue;

            execute(sol);
            if (slot == 0) {
                cum_a += sol.profit;
                ++result.trades_a;
            } else {
                cum_b += sol.profit;
                ++result.trades_b;
            }
            if (cfg.record_trades) result.step_trades[t][slot] = sol.phi;
        }
        result.records.push_back(DuelRecord{t, cum_a / result.initial_pool_value,
                                            cum_b / result.initial_pool_value, pool.reserves});
    }
    result.final_a_profit = cum_a;
    result.final_b_profit = cum_b;
    return result;
}

}  // namespace g3arb
