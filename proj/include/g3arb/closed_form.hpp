// Closed-form optimal arbitrage trade for a fixed trade signature, the
// alternative symmetric form, and the first-order optimality residual.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "core.hpp"

namespace g3arb {

namespace detail {

// Per-(pool, prices) quantities reused across many signature evaluations.
// Amplification enters only through the virtual reserves nu * R_i, so the
// nu = 1 case degenerates to the base formulas bit-for-bit and nu > 1 equals
// the base formulas applied to scaled reserves.
struct EvalContext {
    const PoolState* pool = nullptr;
    const MarketPrices* prices = nullptr;
    std::vector<double> vr;        // nu R_i
    std::vector<double> log_vr;    // ln(nu R_i)
    std::vector<double> log_m_w;   // ln m_i - ln w_i
    double gamma = 1.0;
    double inv_gamma = 1.0;
    double log_gamma = 0.0;

    EvalContext(const PoolState& p, const MarketPrices& m) : pool(&p), prices(&m) {
        const std::size_t n = p.size();
        vr.resize(n);
        log_vr.resize(n);
        log_m_w.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            vr[i] = p.amplification * p.reserves[i];
            log_vr[i] = std::log(vr[i]);
            log_m_w[i] = std::log(m.prices[i]) - std::log(p.weights[i]);
        }
        gamma = p.fee_gamma;
        inv_gamma = 1.0 / gamma;
        log_gamma = std::log(gamma);
    }
};

struct EvalOutcome {
    double profit = 0.0;
    bool sign_ok = false;  // sign-consistent, no near-zero legs, reserves stay positive
};

// Evaluates the closed form for signature s (entries in {-1,0,+1}).
// Per-token terms t_j = ln m_j - ln w_breve_j - d_j ln gamma are accumulated
// into S before a single exponentiation per token; the trade leg comes out as
//   phi_i = gamma^{-d_i} nu R_i expm1(ln(nu_breve k_breve) + S - t_i - ln(nu R_i)),
// which avoids the (level - nu R_i) cancellation for small trades. Writes the
// full-length phi into phi_out when given. With early_exit set, bails out on
// the first sign-inconsistent leg (phi_out is then left incomplete).
inline EvalOutcome eval_signature(const EvalContext& c, std::span<const std::int8_t> s,
                                  double* phi_out, bool early_exit) {
    const PoolState& pool = *c.pool;
    const std::size_t n = pool.size();
    if (phi_out)
        for (std::size_t i = 0; i < n; ++i) phi_out[i] = 0.0;

    double w_active = 0.0;
    double acc_logk = 0.0;  // sum_A w_i ln(nu R_i)
    double acc_s = 0.0;     // sum_A w_i (ln m_i - ln w_i - d_i ln gamma)
    for (std::size_t i = 0; i < n; ++i) {
        if (s[i] == 0) continue;
        const double w = pool.weights[i];
        w_active += w;
        acc_logk += w * c.log_vr[i];
        double t = c.log_m_w[i];
        if (s[i] > 0) t -= c.log_gamma;
        acc_s += w * t;
    }
    const double log_wa = std::log(w_active);
    const double base = acc_logk / w_active + (acc_s / w_active + log_wa);

    EvalOutcome out;
    out.sign_ok = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (s[i] == 0) continue;
        double t = c.log_m_w[i] + log_wa;
        if (s[i] > 0) t -= c.log_gamma;
        double phi = c.vr[i] * std::expm1(base - t - c.log_vr[i]);
        if (s[i] > 0) phi *= c.inv_gamma;
        if (phi_out) phi_out[i] = phi;

        if (std::abs(phi) <= kSignZeroTol * pool.reserves[i] ||
            (phi > 0.0) != (s[i] > 0) ||
            pool.reserves[i] + (s[i] > 0 ? c.gamma : 1.0) * phi <= 0.0) {
            out.sign_ok = false;
            if (early_exit) return out;
        }
        out.profit -= c.prices->prices[i] * phi;
    }
    return out;
}

// Builds a TradeSolution from a raw phi vector: fills profit and residual and
// decides validity (sign consistency, level-set residual, positive profit,
// positive post-trade real reserves).
inline TradeSolution finalize_solution(const PoolState& pool, const MarketPrices& prices,
                                       TradeSignature sig, std::vector<double> phi) {
    TradeSolution sol;
    sol.phi = std::move(phi);
    sol.signature = std::move(sig);
    sol.profit = trade_profit(prices, sol);

    bool ok = true;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const int s = sol.signature.entries[i];
        const double phi_i = sol.phi[i];
        if (s == 0) {
            ok &= (phi_i == 0.0);
            continue;
        }
        const double g = s > 0 ? pool.fee_gamma : 1.0;
        if (std::abs(phi_i) <= kSignZeroTol * pool.reserves[i]) ok = false;
        else if ((phi_i > 0.0) != (s > 0)) ok = false;
        if (pool.reserves[i] + g * phi_i <= 0.0) ok = false;
    }
    try {
        sol.invariant_residual = reduced_invariant_residual(pool, sol);
    } catch (const std::domain_error&) {
        sol.invariant_residual = std::numeric_limits<double>::infinity();
        ok = false;
    }
    sol.valid = ok && std::abs(sol.invariant_residual) <= kResidualTol && sol.profit > 0.0;
    return sol;
}

}  // namespace detail

// Optimal trade for a fixed signature:
//   phi_i = gamma^{-d_i} ( nu_breve k_breve (w_breve_i gamma^{d_i} / m_i)^{1-w_breve_i}
//           prod_{j != i} (m_j / (w_breve_j gamma^{d_j}))^{w_breve_j} - nu R_i )
// over the active set, zero elsewhere; nu_breve = nu^{sum_A w_breve_i}
// collapses to nu since the renormalised weights sum to one. Powers go
// through exp/ln. The solution is flagged valid only when it is
// sign-consistent with the signature, sits on the invariant level set and
// has positive profit.
inline TradeSolution optimal_phi(const PoolState& pool, const MarketPrices& prices,
                                 const TradeSignature& sig) {
    if (sig.size() != pool.size() || prices.size() != pool.size())
        throw std::invalid_argument("optimal_phi: dimension mismatch");
    sig.validate();
    detail::EvalContext ctx(pool, prices);
    std::vector<double> phi(pool.size(), 0.0);
    detail::eval_signature(ctx, std::span<const std::int8_t>(sig.entries), phi.data(), false);
    return detail::finalize_solution(pool, prices, sig, std::move(phi));
}

// Symmetric form of the same trade:
//   phi_i = gamma^{-d_i} nu R_i ( (w_breve_i gamma^{d_i} / (m_i nu R_i))^{1-w_breve_i}
//           prod_{j != i} (m_j nu R_j / (w_breve_j gamma^{d_j}))^{w_breve_j} - 1 )
// evaluated per token from the price/reserve ratios directly. Kept as an
// independent arithmetic route for cross-validation; agrees with optimal_phi
// to ~1e-10 relative.
inline TradeSolution optimal_phi_symmetric(const PoolState& pool, const MarketPrices& prices,
                                           const TradeSignature& sig) {
    if (sig.size() != pool.size() || prices.size() != pool.size())
        throw std::invalid_argument("optimal_phi_symmetric: dimension mismatch");
    sig.validate();
    const auto aw = ActiveWeights::from(pool, sig);
    const double nu = pool.amplification;
    const double gamma = pool.fee_gamma;

    std::vector<double> phi(pool.size(), 0.0);
    const std::size_t na = aw.active.size();
    for (std::size_t a = 0; a < na; ++a) {
        const std::size_t i = aw.active[a];
        const double gi = sig.fee_indicator(i) ? gamma : 1.0;
        const double vr_i = nu * pool.reserves[i];
        const double wb_i = aw.values[a];
        double log_fac = (1.0 - wb_i) * std::log(wb_i * gi / (prices.prices[i] * vr_i));
        for (std::size_t b = 0; b < na; ++b) {
            if (b == a) continue;
            const std::size_t j = aw.active[b];
            const double gj = sig.fee_indicator(j) ? gamma : 1.0;
            log_fac += aw.values[b] *
                       std::log(prices.prices[j] * nu * pool.reserves[j] / (aw.values[b] * gj));
        }
        double p = vr_i * std::expm1(log_fac);
        if (sig.fee_indicator(i)) p /= gamma;
        phi[i] = p;
    }
    return detail::finalize_solution(pool, prices, sig, std::move(phi));
}

// First-order optimality residual: with R'_i = nu R_i + gamma^{d_i} phi_i,
// all lambda_i = m_i R'_i / (w_breve_i gamma^{d_i}) must coincide at the
// optimum. Returns max over active pairs of |1 - lambda_j / lambda_i|.
inline double post_trade_price_alignment(const PoolState& pool, const MarketPrices& prices,
                                         const TradeSolution& sol) {
    if (sol.phi.size() != pool.size() || prices.size() != pool.size())
        throw std::invalid_argument("post_trade_price_alignment: dimension mismatch");
    const auto aw = ActiveWeights::from(pool, sol.signature);
    const double nu = pool.amplification;
    const std::size_t na = aw.active.size();
    std::vector<double> lambda(na);
    for (std::size_t a = 0; a < na; ++a) {
        const std::size_t i = aw.active[a];
        const double gi = sol.signature.fee_indicator(i) ? pool.fee_gamma : 1.0;
        const double post = nu * pool.reserves[i] + gi * sol.phi[i];
        lambda[a] = prices.prices[i] * post / (aw.values[a] * gi);
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < na; ++b) {
            if (a == b) continue;
            worst = std::max(worst, std::abs(1.0 - lambda[b] / lambda[a]));
        }
    return worst;
}

}  // namespace g3arb
