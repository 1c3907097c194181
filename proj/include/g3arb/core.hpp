// Domain types for weighted geometric-mean pools, market prices and trades,
// plus the trading-function invariant in raw and reduced form.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace g3arb {

// Tolerance for the weight-sum check on pool construction.
inline constexpr double kWeightSumTol = 1e-12;

// A solution counts as sitting on the invariant level set when the reduced
// residual is within this bound.
inline constexpr double kResidualTol = 1e-9;

// |phi_i| <= kSignZeroTol * R_i is treated as zero when checking sign
// consistency; such a token should have been inactive.
inline constexpr double kSignZeroTol = 1e-12;

// Pool of N tokens. `fee_gamma` is the retained fraction gamma, so the fee
// rate is 1 - gamma. `amplification` scales reserves to virtual reserves
// nu * R; 1 means no amplification.
struct PoolState {
    std::vector<double> reserves;
    std::vector<double> weights;
    double fee_gamma = 1.0;
    double amplification = 1.0;

    std::size_t size() const { return reserves.size(); }

    void validate() const {
        const std::size_t n = reserves.size();
        if (n < 2)
            throw std::invalid_argument("pool: need at least 2 tokens, got " + std::to_string(n));
        if (weights.size() != n)
            throw std::invalid_argument("pool: reserves/weights length mismatch (" +
                                        std::to_string(n) + " vs " + std::to_string(weights.size()) + ")");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(reserves[i] > 0.0) || !std::isfinite(reserves[i]))
                throw std::invalid_argument("pool: reserves[" + std::to_string(i) + "] must be positive");
            if (!(weights[i] > 0.0) || !(weights[i] < 1.0))
                throw std::invalid_argument("pool: weights[" + std::to_string(i) + "] must lie in (0,1)");
        }
        const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (std::abs(wsum - 1.0) > kWeightSumTol)
            throw std::invalid_argument("pool: weights sum to " + std::to_string(wsum) + ", expected 1");
        if (!(fee_gamma > 0.0) || fee_gamma > 1.0)
            throw std::invalid_argument("pool: fee_gamma must lie in (0,1]");
        if (!(amplification >= 1.0) || !std::isfinite(amplification))
            throw std::invalid_argument("pool: amplification must be >= 1");
    }
};

// External market prices, one per token, all in a single numeraire.
struct MarketPrices {
    std::vector<double> prices;

    std::size_t size() const { return prices.size(); }

    void validate() const {
        if (prices.empty())
            throw std::invalid_argument("prices: empty vector");
        for (std::size_t i = 0; i < prices.size(); ++i)
            if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
                throw std::invalid_argument("prices: prices[" + std::to_string(i) + "] must be positive");
    }
};

// Ternary trade direction per token: +1 token flows into the pool, -1 token
// is extracted, 0 untouched. A tradeable signature has at least one +1 and
// at least one -1; the all-zero signature is the no-trade sentinel used by
// zero TradeSolutions.
struct TradeSignature {
    std::vector<std::int8_t> entries;

    static TradeSignature none(std::size_t n) { return TradeSignature{std::vector<std::int8_t>(n, 0)}; }

    std::size_t size() const { return entries.size(); }

    bool tradeable() const {
        bool has_in = false, has_out = false;
        for (auto s : entries) {
            has_in |= (s > 0);
            has_out |= (s < 0);
        }
        return has_in && has_out;
    }

    // d_i = 1 exactly where s_i = +1; fees apply to the inward leg only.
    int fee_indicator(std::size_t i) const { return entries[i] > 0 ? 1 : 0; }

    std::vector<std::size_t> active() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i] != 0) idx.push_back(i);
        return idx;
    }

    std::size_t active_count() const {
        std::size_t c = 0;
        for (auto s : entries) c += (s != 0);
        return c;
    }

    void validate() const {
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i] < -1 || entries[i] > 1)
                throw std::invalid_argument("signature: entries[" + std::to_string(i) + "] not in {-1,0,+1}");
        if (!tradeable())
            throw std::invalid_argument("signature: needs at least one +1 and one -1 entry");
    }

    bool operator==(const TradeSignature&) const = default;
};

// Net trade vector phi = delta - lambda, together with the signature it was
// computed for, its profit in the numeraire and the reduced invariant
// residual. `valid` means: sign-consistent with the signature, residual on
// the level set, positive profit and positive post-trade real reserves.
struct TradeSolution {
    std::vector<double> phi;
    TradeSignature signature;
    double profit = 0.0;
    double invariant_residual = 0.0;
    bool valid = false;

    static TradeSolution no_trade(std::size_t n) {
        TradeSolution s;
        s.phi.assign(n, 0.0);
        s.signature = TradeSignature::none(n);
        return s;
    }
};

// Weights renormalised over the active set, plus the active-reserve
// geometric mean k_breve = prod_{i in A} R_i^{w_breve_i}.
struct ActiveWeights {
    std::vector<std::size_t> active;
    std::vector<double> values;
    double k_breve = 0.0;

    static ActiveWeights from(const PoolState& pool, const TradeSignature& sig) {
        if (sig.size() != pool.size())
            throw std::invalid_argument("signature length does not match pool size");
        ActiveWeights aw;
        aw.active = sig.active();
        if (aw.active.empty())
            throw std::invalid_argument("signature has no active tokens");
        double wsum = 0.0;
        for (auto i : aw.active) wsum += pool.weights[i];
        double log_k = 0.0;
        aw.values.reserve(aw.active.size());
        for (auto i : aw.active) {
            const double wb = pool.weights[i] / wsum;
            aw.values.push_back(wb);
            log_k += wb * std::log(pool.reserves[i]);
        }
        aw.k_breve = std::exp(log_k);
        return aw;
    }
};

// Trading-function value prod_i (nu R_i)^{w_i}, computed in log space.
inline double invariant_k(const PoolState& pool) {
    const double log_nu = std::log(pool.amplification);
    double acc = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i)
        acc += pool.weights[i] * (log_nu + std::log(pool.reserves[i]));
    return std::exp(acc);
}

// Reduced form of the trading function over the active set:
//   prod_{i in A} (1 + gamma^{d_i} phi_i / (nu R_i))^{w_breve_i} - 1.
// Zero means the trade sits exactly on the invariant level set. Throws
// std::domain_error when a factor is nonpositive (the trade would overdraw
// a reserve).
inline double reduced_invariant_residual(const PoolState& pool, const TradeSolution& sol) {
    if (sol.phi.size() != pool.size())
        throw std::invalid_argument("solution phi length does not match pool size");
    const auto active = sol.signature.active();
    if (active.empty()) return 0.0;
    double wsum = 0.0;
    for (auto i : active) wsum += pool.weights[i];
    const double nu = pool.amplification;
    double acc = 0.0;
    for (auto i : active) {
        const double g = sol.signature.fee_indicator(i) ? pool.fee_gamma : 1.0;
        const double x = g * sol.phi[i] / (nu * pool.reserves[i]);
        if (x <= -1.0)
            throw std::domain_error("trade overdraws reserve of token " + std::to_string(i));
        acc += (pool.weights[i] / wsum) * std::log1p(x);
    }
    return std::expm1(acc);
}

// Arbitrageur return -sum_i m_i phi_i: value extracted minus value paid.
inline double trade_profit(const MarketPrices& prices, const TradeSolution& sol) {
    if (sol.phi.size() != prices.size())
        throw std::invalid_argument("solution phi length does not match prices size");
    double acc = 0.0;
    for (std::size_t i = 0; i < sol.phi.size(); ++i)
        acc -= prices.prices[i] * sol.phi[i];
    return acc;
}

struct TradeLegs {
    std::vector<double> delta;   // amounts in
    std::vector<double> lambda;  // amounts out
};

// Split phi into the inward and outward legs. delta_i * lambda_i = 0 by
// construction; delta - lambda reproduces phi bit-exactly.
inline TradeLegs split_phi(const TradeSolution& sol) {
    TradeLegs legs;
    legs.delta.resize(sol.phi.size());
    legs.lambda.resize(sol.phi.size());
    for (std::size_t i = 0; i < sol.phi.size(); ++i) {
        legs.delta[i] = std::max(sol.phi[i], 0.0);
        legs.lambda[i] = std::max(-sol.phi[i], 0.0);
    }
    return legs;
}

}  // namespace g3arb
