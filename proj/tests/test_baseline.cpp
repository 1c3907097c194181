#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "g3arb/baseline.hpp"
#include "g3arb/bench.hpp"
#include "g3arb/signature_search.hpp"

using namespace g3arb;

namespace {

const PoolState kWorkedPool{{100.0, 100.0}, {0.5, 0.5}, 1.0, 1.0};
const MarketPrices kWorkedPrices{{1.1, 1.0}};
const double kWorkedProfit = 210.0 - 200.0 * std::sqrt(1.1);

PoolState equilibrium_3tok(double gamma) {
    return PoolState{{100.0, 200.0, 400.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, gamma, 1.0};
}

double raw_invariant_slack(const PoolState& pool, const TradeSolution& sol) {
    // log of prod(nu R + gamma delta - lambda)^w minus log of nu k
    const auto legs = split_phi(sol);
    double after = 0.0, before = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double nu_r = pool.amplification * pool.reserves[i];
        after += pool.weights[i] * std::log(nu_r + pool.fee_gamma * legs.delta[i] - legs.lambda[i]);
        before += pool.weights[i] * std::log(nu_r);
    }
    return after - before;
}

}  // namespace

TEST(SolverConfig, Validation) {
    SolverConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.max_iterations = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = SolverConfig{};
    cfg.convergence_tol = 1e-13;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = SolverConfig{};
    cfg.step_size = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = SolverConfig{};
    cfg.penalty_weight = -1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(SolveNumerical, EquilibriumIsNumericallyZero) {
    const auto pool = equilibrium_3tok(0.997);
    const MarketPrices m{{4.0, 2.0, 1.0}};
    const auto res = solve_numerical(pool, m);
    double pool_value = 0.0;
    for (std::size_t i = 0; i < 3; ++i) pool_value += m.prices[i] * pool.reserves[i];
    EXPECT_LE(res.trade.profit, 1e-6 * pool_value);
    EXPECT_EQ(res.trade.profit, 0.0);  // certified nothing: zero trade
    EXPECT_EQ(res.trade.phi, std::vector<double>(3, 0.0));
}

TEST(SolveNumerical, WorkedInstanceMatchesClosedForm) {
    const auto res = solve_numerical(kWorkedPool, kWorkedPrices);
    ASSERT_GT(res.trade.profit, 0.0);
    EXPECT_NEAR(res.trade.profit, kWorkedProfit, 1e-4 * kWorkedProfit);
}

TEST(SolveNumerical, DeterministicGivenSeed) {
    SolverConfig cfg;
    cfg.seed = 1234;
    const auto a = solve_numerical(kWorkedPool, kWorkedPrices, cfg);
    const auto b = solve_numerical(kWorkedPool, kWorkedPrices, cfg);
    EXPECT_EQ(a.trade.phi, b.trade.phi);
    EXPECT_EQ(a.trade.profit, b.trade.profit);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(SolveNumerical, SolutionsAreFeasible) {
    std::mt19937_64 rng(17);
    int executed = 0;
    for (int trial = 0; trial < 100; ++trial) {
        InstanceParams params;
        params.n_tokens = 2 + static_cast<int>(rng() % 3);
        params.fee_gamma = (trial % 2) ? 0.997 : 0.95;
        auto [pool, prices] = sample_instance(params, rng());
        SolverConfig cfg;
        cfg.seed = rng();
        const auto res = solve_numerical(pool, prices, cfg);
        if (res.trade.signature.tradeable()) {
            ++executed;
            EXPECT_GE(raw_invariant_slack(pool, res.trade), -1e-9);
            for (std::size_t i = 0; i < pool.size(); ++i) {
                const double g = res.trade.phi[i] > 0.0 ? pool.fee_gamma : 1.0;
                EXPECT_GT(pool.reserves[i] + g * res.trade.phi[i], 0.0);
            }
        }
    }
    EXPECT_GT(executed, 30);
}

// The closed form is exact; the baseline is approximate. The baseline must
// never come out ahead by more than round-off.
TEST(SolveNumerical, NeverBeatsClosedForm) {
    std::mt19937_64 rng(29);
    int compared = 0;
    for (int trial = 0; trial < 150; ++trial) {
        InstanceParams params;
        params.n_tokens = 2 + static_cast<int>(rng() % 3);
        auto [pool, prices] = sample_instance(params, rng());
        SolverConfig cfg;
        cfg.seed = rng();
        const auto base = solve_numerical(pool, prices, cfg);
        const auto closed = find_best_trade(pool, prices, SearchOptions{.threads = 1});
        ++compared;
        EXPECT_LE(base.trade.profit, closed.best.profit + cfg.convergence_tol +
                                         1e-9 * std::abs(closed.best.profit));
    }
    EXPECT_EQ(compared, 150);
}

TEST(SolveNumerical, ClosedFormWeaklyDominates) {
    std::mt19937_64 rng(31);
    int wins = 0, total = 0;
    for (int trial = 0; trial < 200; ++trial) {
        InstanceParams params;
        params.n_tokens = 3;
        params.fee_gamma = 0.95;
        auto [pool, prices] = sample_instance(params, rng());
        SolverConfig cfg;
        cfg.seed = rng();
        const auto base = solve_numerical(pool, prices, cfg);
        const auto closed = find_best_trade(pool, prices, SearchOptions{.threads = 1});
        ++total;
        wins += (closed.best.profit >= base.trade.profit - 1e-6);
    }
    EXPECT_GE(static_cast<double>(wins) / total, 0.95);
}

TEST(GridOracle, RejectsBadArguments) {
    PoolState big{std::vector<double>(4, 100.0), std::vector<double>(4, 0.25), 0.997, 1.0};
    MarketPrices m4{std::vector<double>(4, 1.0)};
    EXPECT_THROW(solve_grid_oracle(big, m4, 101), std::invalid_argument);
    EXPECT_THROW(solve_grid_oracle(kWorkedPool, kWorkedPrices, 2002), std::invalid_argument);
    EXPECT_THROW(solve_grid_oracle(kWorkedPool, kWorkedPrices, 2), std::invalid_argument);
}

TEST(GridOracle, EquilibriumGivesZeroTrade) {
    const auto pool = equilibrium_3tok(0.997);
    const MarketPrices m{{4.0, 2.0, 1.0}};
    const auto sol = solve_grid_oracle(pool, m, 501);
    EXPECT_EQ(sol.profit, 0.0);
    EXPECT_EQ(sol.phi, std::vector<double>(3, 0.0));
}

// The worked instance: the oracle is the referee for the closed form. Nested
// grids (101 | 501 | 2001 points over the same box) approach the closed-form
// profit from below, monotonically.
TEST(GridOracle, ConvergesToClosedFormFromBelow) {
    const double p101 = solve_grid_oracle(kWorkedPool, kWorkedPrices, 101).profit;
    const double p501 = solve_grid_oracle(kWorkedPool, kWorkedPrices, 501).profit;
    const double p2001 = solve_grid_oracle(kWorkedPool, kWorkedPrices, 2001).profit;
    EXPECT_LE(p101, p501 + 1e-15);
    EXPECT_LE(p501, p2001 + 1e-15);
    EXPECT_LE(p2001, kWorkedProfit + 1e-9);
    EXPECT_NEAR(p2001, kWorkedProfit, 1e-5);

    GridOracleOptions refined;
    refined.grid_points = 2001;
    refined.refinements = 1;
    const double p_ref = solve_grid_oracle(kWorkedPool, kWorkedPrices, refined).profit;
    EXPECT_GE(p_ref, p2001 - 1e-15);
    EXPECT_NEAR(p_ref, kWorkedProfit, 1e-8);
}

TEST(GridOracle, WorkedInstanceTradeShape) {
    const auto sol = solve_grid_oracle(kWorkedPool, kWorkedPrices, 2001);
    ASSERT_TRUE(sol.valid);
    EXPECT_EQ(sol.signature.entries, (std::vector<std::int8_t>{-1, 1}));
    EXPECT_NEAR(sol.phi[0], 100.0 / std::sqrt(1.1) - 100.0, 2e-2);
    EXPECT_NEAR(sol.phi[1], 100.0 * std::sqrt(1.1) - 100.0, 2e-2);
    EXPECT_LE(std::abs(sol.invariant_residual), kResidualTol);
}

// Closed form vs oracle over random two- and three-token instances. Shocks
// are sized so the optimum is well above the grid resolution; arbitrage just
// past the fee boundary is below what a 2001-point grid can resolve and is
// covered by the residual/alignment suites instead.
TEST(GridOracle, AgreesWithClosedFormOnRandomInstances) {
    std::mt19937_64 rng(41);
    GridOracleOptions opts;
    opts.grid_points = 2001;
    opts.refinements = 1;
    for (int trial = 0; trial < 40; ++trial) {
        InstanceParams params;
        params.n_tokens = 2 + (trial % 2);
        params.fee_gamma = 0.997;
        params.price_spread = 0.25;
        params.reserve_orders = 3.0;
        params.min_quote_gap = 0.15;
        auto [pool, prices] = sample_instance(params, rng());
        const double closed = find_best_trade(pool, prices, SearchOptions{.threads = 1}).best.profit;
        const double oracle = solve_grid_oracle(pool, prices, opts).profit;
        const double scale = std::max({1e-9, closed, oracle});
        EXPECT_LE(std::abs(closed - oracle), 1e-4 * scale)
            << "closed=" << closed << " oracle=" << oracle;
        EXPECT_LE(oracle, closed + 1e-4 * scale);
    }
}
