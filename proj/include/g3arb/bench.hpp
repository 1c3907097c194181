// Timing harness for the closed-form search and the numerical baseline, plus
// the seeded random-instance sampler shared by benchmarks and tests.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "baseline.hpp"
#include "core.hpp"
#include "signature_search.hpp"

namespace g3arb {

struct InstanceParams {
    int n_tokens = 3;
    double fee_gamma = 0.997;
    double amplification = 1.0;
    double reserve_orders = 6.0;  // reserves are log-uniform over this many decades
    double price_spread = 0.2;    // prices deviate from quoted by up to this fraction
    double min_quote_gap = 0.0;   // resample until max/min price-to-quote ratio exceeds this
};

// Random pool/prices pair: log-uniform reserves, moderately uneven weights,
// prices sampled around the pool's quoted prices so instances straddle the
// no-arb boundary. With min_quote_gap set, the price perturbations are
// redrawn until the widest pairwise mispricing exceeds the gap (used where a
// grid-resolution-limited referee needs a resolvable optimum). Deterministic
// in the seed.
inline std::pair<PoolState, MarketPrices> sample_instance(const InstanceParams& params,
                                                          std::uint64_t seed) {
    std::mt19937_64 rng(detail::splitmix64(seed));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n = params.n_tokens;

    std::vector<double> w(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
        w[i] = 0.2 + 0.8 * uni(rng);
        wsum += w[i];
    }
    for (int i = 0; i < n; ++i) w[i] /= wsum;

    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = std::pow(10.0, params.reserve_orders * uni(rng));

    std::vector<double> dev(n), m(n);
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (int i = 0; i < n; ++i) dev[i] = 1.0 + params.price_spread * (2.0 * uni(rng) - 1.0);
        const auto [lo, hi] = std::minmax_element(dev.begin(), dev.end());
        if (*hi / *lo >= 1.0 + params.min_quote_gap) break;
    }
    for (int i = 0; i < n; ++i) m[i] = (w[i] / r[i]) * dev[i];

    PoolState pool{std::move(r), std::move(w), params.fee_gamma, params.amplification};
    pool.validate();
    return {std::move(pool), MarketPrices{std::move(m)}};
}

struct BenchRecord {
    int n_tokens = 0;
    std::string method;  // "closed" | "baseline"
    unsigned threads = 1;
    double median_time_s = 0.0;
    double p95_time_s = 0.0;
    int instances = 0;
};

struct BenchOptions {
    int n_min = 2;
    int n_max = 7;
    int instances = 30;
    bool bench_closed = true;
    bool bench_baseline = false;
    std::vector<unsigned> thread_counts = {1, 0};  // 0 = available parallelism
    std::uint64_t seed = 42;
    SolverConfig solver{};
};

namespace detail {

inline double nth_quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

// Median / p95 per-call times over seeded random instances. Short calls are
// repeated until at least ~200us of work is measured so small-N medians are
// not pure clock noise.
inline std::vector<BenchRecord> run_bench(const BenchOptions& opts) {
    if (opts.instances < 30) throw std::invalid_argument("bench: need at least 30 instances per cell");
    if (opts.n_min < 2 || opts.n_max > kMaxEnumerateTokens || opts.n_min > opts.n_max)
        throw std::invalid_argument("bench: bad token range");

    std::vector<BenchRecord> records;
    volatile double sink = 0.0;

    for (int n = opts.n_min; n <= opts.n_max; ++n) {
        InstanceParams params;
        params.n_tokens = n;
        std::vector<std::pair<PoolState, MarketPrices>> instances;
        instances.reserve(opts.instances);
        for (int i = 0; i < opts.instances; ++i)
            instances.push_back(sample_instance(
                params, detail::splitmix64(opts.seed + 1315423911ULL * n) + static_cast<std::uint64_t>(i)));

        if (opts.bench_closed) {
            for (unsigned tc : opts.thread_counts) {
                const unsigned threads = tc == 0 ? detail::ThreadPool::default_threads() : tc;
                std::vector<double> times;
                times.reserve(instances.size());
                for (const auto& [pool, prices] : instances) {
                    const SearchOptions sopts{.threads = threads};
                    sink = sink + find_best_trade(pool, prices, sopts).best.profit;  // warm-up
                    long reps = 1;
                    double elapsed = 0.0;
                    for (;;) {
                        const auto t0 = std::chrono::steady_clock::now();
                        for (long k = 0; k < reps; ++k)
                            sink = sink + find_best_trade(pool, prices, sopts).best.profit;
                        elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                        if (elapsed >= 2e-4 || reps >= (1L << 16)) break;
                        reps *= 4;
                    }
                    times.push_back(elapsed / static_cast<double>(reps));
                }
                records.push_back(BenchRecord{n, "closed", threads, detail::nth_quantile(times, 0.5),
                                              detail::nth_quantile(times, 0.95),
                                              static_cast<int>(times.size())});
            }
        }

        if (opts.bench_baseline) {
            std::vector<double> times;
            times.reserve(instances.size());
            for (std::size_t i = 0; i < instances.size(); ++i) {
                SolverConfig solver = opts.solver;
                solver.seed = opts.seed + i;
                const auto t0 = std::chrono::steady_clock::now();
                sink = sink + solve_numerical(instances[i].first, instances[i].second, solver).trade.profit;
                times.push_back(
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
            records.push_back(BenchRecord{n, "baseline", 1, detail::nth_quantile(times, 0.5),
                                          detail::nth_quantile(times, 0.95),
                                          static_cast<int>(times.size())});
        }
    }
    return records;
}

inline std::string bench_csv(const std::vector<BenchRecord>& records) {
    std::ostringstream out;
    out << "n_tokens,method,threads,median_time_s,p95_time_s,instances\n";
    out << std::setprecision(17);
    for (const auto& r : records)
        out << r.n_tokens << ',' << r.method << ',' << r.threads << ',' << r.median_time_s << ','
            << r.p95_time_s << ',' << r.instances << '\n';
    return out.str();
}

}  // namespace g3arb
