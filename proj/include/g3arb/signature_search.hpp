// Trade-signature enumeration and the brute-force search for the best
// closed-form trade, plus the price-quotient heuristic for guessing a
// signature without enumeration.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "closed_form.hpp"
#include "core.hpp"
#include "thread_pool.hpp"

namespace g3arb {

// Enumeration is capped: beyond 12 tokens the 3^N sweep is refused rather
// than silently attempted. Counting by formula goes further.
inline constexpr int kMaxEnumerateTokens = 12;
inline constexpr int kMaxCountTokens = 30;

// Profits within this relative distance are treated as tied; ties prefer
// fewer active tokens, then canonical signature order.
inline constexpr double kProfitTieTol = 1e-12;

namespace detail {

inline std::uint64_t pow3(int n) {
    std::uint64_t v = 1;
    for (int i = 0; i < n; ++i) v *= 3;
    return v;
}

// Canonical order is ternary counting with token 0 as the most significant
// digit and digit mapping 0 -> -1, 1 -> 0, 2 -> +1.
inline bool decode_signature(std::uint64_t code, int n, std::int8_t* out) {
    bool has_in = false, has_out = false;
    for (int i = n - 1; i >= 0; --i) {
        const int digit = static_cast<int>(code % 3);
        code /= 3;
        out[i] = static_cast<std::int8_t>(digit - 1);
        has_in |= (digit == 2);
        has_out |= (digit == 0);
    }
    return has_in && has_out;
}

}  // namespace detail

// |S(n)| = 3^n - 2^{n+1} + 1: all ternary vectors minus those missing a +1
// or a -1, the all-zero vector added back once.
inline std::uint64_t signature_count(int n) {
    if (n < 2 || n > kMaxCountTokens)
        throw std::invalid_argument("signature_count: n must lie in [2," +
                                    std::to_string(kMaxCountTokens) + "]");
    return detail::pow3(n) - (std::uint64_t{1} << (n + 1)) + 1;
}

// Fraction of all 3^n ternary vectors that are valid signatures; tends to 1.
inline double signature_fraction(int n) {
    return static_cast<double>(signature_count(n)) / static_cast<double>(detail::pow3(n));
}

struct SignatureSet {
    int n_tokens = 0;
    std::vector<TradeSignature> signatures;  // canonical order
};

inline SignatureSet enumerate_signatures(int n) {
    if (n < 2 || n > kMaxEnumerateTokens)
        throw std::invalid_argument("enumerate_signatures: n must lie in [2," +
                                    std::to_string(kMaxEnumerateTokens) + "]");
    SignatureSet set;
    set.n_tokens = n;
    set.signatures.reserve(signature_count(n));
    std::int8_t buf[kMaxEnumerateTokens];
    const std::uint64_t total = detail::pow3(n);
    for (std::uint64_t code = 0; code < total; ++code) {
        if (!detail::decode_signature(code, n, buf)) continue;
        set.signatures.push_back(TradeSignature{std::vector<std::int8_t>(buf, buf + n)});
    }
    return set;
}

struct SearchOptions {
    unsigned threads = 0;     // 0 = available parallelism
    bool collect_all = false; // keep one solution per signature for diagnostics
};

struct SearchResult {
    TradeSolution best;                 // zero trade, profit 0 when in the no-arb region
    std::size_t evaluated_count = 0;    // |S(N)|
    std::optional<std::vector<TradeSolution>> all_solutions;
};

namespace detail {

// Sequential winner scan in canonical order. Slots with profit <= 0 are
// skipped; near-ties (within kProfitTieTol relative) prefer fewer active
// tokens, remaining ties keep the earlier code. Returns profit.size() when
// every slot is unprofitable.
inline std::size_t select_winner(const std::vector<double>& profit,
                                 const std::vector<std::uint8_t>& n_active) {
    std::size_t best = profit.size();
    double best_profit = 0.0;
    std::uint8_t best_active = std::numeric_limits<std::uint8_t>::max();
    for (std::size_t code = 0; code < profit.size(); ++code) {
        const double p = profit[code];
        if (!(p > 0.0)) continue;
        if (best == profit.size()) {
            best = code, best_profit = p, best_active = n_active[code];
            continue;
        }
        const bool tied =
            std::abs(p - best_profit) <= kProfitTieTol * std::max(std::abs(p), std::abs(best_profit));
        if (tied) {
            if (n_active[code] < best_active)
                best = code, best_profit = p, best_active = n_active[code];
        } else if (p > best_profit) {
            best = code, best_profit = p, best_active = n_active[code];
        }
    }
    return best;
}

}  // namespace detail

// Evaluates the closed form for every signature in S(N) and returns the
// max-profit valid solution. Evaluation is data-parallel over disjoint code
// ranges; each slot of the scratch arrays belongs to exactly one signature,
// and the winner is picked by one sequential scan in canonical order, so the
// result is identical for any thread count.
inline SearchResult find_best_trade(const PoolState& pool, const MarketPrices& prices,
                                    const SearchOptions& opts = {}) {
    pool.validate();
    prices.validate();
    const int n = static_cast<int>(pool.size());
    if (prices.size() != pool.size())
        throw std::invalid_argument("find_best_trade: prices/pool dimension mismatch");
    if (n > kMaxEnumerateTokens)
        throw std::invalid_argument("find_best_trade: enumeration capped at " +
                                    std::to_string(kMaxEnumerateTokens) + " tokens");

    const std::uint64_t total = detail::pow3(n);
    SearchResult result;
    result.evaluated_count = signature_count(n);

    const detail::EvalContext ctx(pool, prices);
    std::vector<double> profit(total, -std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> n_active(total, 0);

    // below 3^5 codes the work is smaller than the dispatch cost
    const unsigned threads = total < 243 ? 1u : opts.threads;
    detail::ThreadPool::global().parallel_ranges(
        threads, static_cast<std::size_t>(total), [&](std::size_t begin, std::size_t end) {
            std::int8_t sig[kMaxEnumerateTokens];
            for (std::size_t code = begin; code < end; ++code) {
                if (!detail::decode_signature(code, n, sig)) continue;
                const auto out = detail::eval_signature(ctx, std::span<const std::int8_t>(sig, n),
                                                        nullptr, /*early_exit=*/true);
                if (!out.sign_ok || !(out.profit > 0.0)) continue;
                profit[code] = out.profit;
                std::uint8_t na = 0;
                for (int i = 0; i < n; ++i) na += (sig[i] != 0);
                n_active[code] = na;
            }
        });

    const std::size_t best_code = detail::select_winner(profit, n_active);

    if (best_code != total) {
        std::int8_t sig[kMaxEnumerateTokens];
        detail::decode_signature(best_code, n, sig);
        auto sol = optimal_phi(pool, prices, TradeSignature{std::vector<std::int8_t>(sig, sig + n)});
        result.best = sol.valid ? std::move(sol) : TradeSolution::no_trade(pool.size());
    } else {
        result.best = TradeSolution::no_trade(pool.size());
    }

    if (opts.collect_all) {
        std::vector<TradeSolution> all;
        all.reserve(result.evaluated_count);
        std::int8_t sig[kMaxEnumerateTokens];
        for (std::uint64_t code = 0; code < total; ++code) {
            if (!detail::decode_signature(code, n, sig)) continue;
            all.push_back(optimal_phi(pool, prices, TradeSignature{std::vector<std::int8_t>(sig, sig + n)}));
        }
        result.all_solutions = std::move(all);
    }
    return result;
}

// Price-quotient heuristic for the trade signature. With the zero-fee quoted
// to market price ratio l_i = V w_i / (R_i m_i), V = sum m_i R_i, a token is
// active when some pairwise quotient l_i / l_j escapes the fee band
// (gamma, 1/gamma); active tokens trade inward when l_i > 1 and outward when
// l_i < 1. Returns nullopt when the result lacks a +1 or a -1.
inline std::optional<TradeSignature> heuristic_signature(const PoolState& pool,
                                                         const MarketPrices& prices) {
    pool.validate();
    prices.validate();
    if (prices.size() != pool.size())
        throw std::invalid_argument("heuristic_signature: prices/pool dimension mismatch");
    const std::size_t n = pool.size();

    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) value += prices.prices[i] * pool.reserves[i];
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i)
        l[i] = value * pool.weights[i] / (pool.reserves[i] * prices.prices[i]);

    const double inv_gamma = 1.0 / pool.fee_gamma;
    TradeSignature sig = TradeSignature::none(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool escapes = false;
        for (std::size_t j = 0; j < n && !escapes; ++j) {
            if (j == i) continue;
            const double q = l[i] / l[j];
            escapes = (q > inv_gamma) || (q < pool.fee_gamma);
        }
        if (!escapes) continue;
        // l_i within rounding of 1 gives no direction; leave the token out.
        if (l[i] > 1.0 + kSignZeroTol) sig.entries[i] = 1;
        else if (l[i] < 1.0 - kSignZeroTol) sig.entries[i] = -1;
    }
    if (!sig.tradeable()) return std::nullopt;
    return sig;
}

}  // namespace g3arb
