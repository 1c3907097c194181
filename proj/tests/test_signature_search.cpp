#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "g3arb/bench.hpp"
#include "g3arb/signature_search.hpp"

using namespace g3arb;

namespace {

// Independent reference count: filter all n-digit ternary vectors.
std::uint64_t brute_count(int n) {
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    std::uint64_t count = 0;
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        bool has_in = false, has_out = false;
        for (int i = 0; i < n; ++i) {
            const int digit = static_cast<int>(c % 3);
            c /= 3;
            has_in |= (digit == 2);
            has_out |= (digit == 0);
        }
        count += (has_in && has_out);
    }
    return count;
}

PoolState equal_pool(int n, double gamma) {
    return PoolState{std::vector<double>(n, 100.0), std::vector<double>(n, 1.0 / n), gamma, 1.0};
}

}  // namespace

TEST(Enumeration, KnownCounts) {
    EXPECT_EQ(enumerate_signatures(3).signatures.size(), 12u);
    EXPECT_EQ(enumerate_signatures(4).signatures.size(), 50u);
    EXPECT_EQ(signature_count(3), 12u);
    EXPECT_EQ(signature_count(4), 50u);
}

TEST(Enumeration, TwoTokensInCanonicalOrder) {
    const auto set = enumerate_signatures(2);
    ASSERT_EQ(set.signatures.size(), 2u);
    EXPECT_EQ(set.signatures[0].entries, (std::vector<std::int8_t>{-1, 1}));
    EXPECT_EQ(set.signatures[1].entries, (std::vector<std::int8_t>{1, -1}));
}

TEST(Enumeration, CountLawMatchesExplicitEnumeration) {
    for (int n = 2; n <= 7; ++n) {
        EXPECT_EQ(signature_count(n), brute_count(n)) << "n=" << n;
        EXPECT_EQ(enumerate_signatures(n).signatures.size(), signature_count(n)) << "n=" << n;
    }
}

TEST(Enumeration, EveryMemberTradeableAndOrdered) {
    const auto set = enumerate_signatures(5);
    std::set<std::vector<std::int8_t>> seen;
    for (const auto& sig : set.signatures) {
        EXPECT_TRUE(sig.tradeable());
        EXPECT_TRUE(seen.insert(sig.entries).second);  // unique
    }
    // canonical order = increasing ternary code
    auto code_of = [](const TradeSignature& s) {
        std::uint64_t c = 0;
        for (auto e : s.entries) c = c * 3 + static_cast<std::uint64_t>(e + 1);
        return c;
    };
    for (std::size_t i = 1; i < set.signatures.size(); ++i)
        EXPECT_LT(code_of(set.signatures[i - 1]), code_of(set.signatures[i]));
}

TEST(Enumeration, RangeErrors) {
    EXPECT_THROW(enumerate_signatures(1), std::invalid_argument);
    EXPECT_THROW(enumerate_signatures(13), std::invalid_argument);
    EXPECT_THROW(signature_count(1), std::invalid_argument);
    EXPECT_THROW(signature_count(31), std::invalid_argument);
}

TEST(Fraction, KnownValuesAndMonotonicity) {
    EXPECT_NEAR(signature_fraction(3), 12.0 / 27.0, 1e-15);
    EXPECT_NEAR(signature_fraction(5), (243.0 - 64.0 + 1.0) / 243.0, 1e-15);
    EXPECT_LT(signature_fraction(5), 0.8);  // < 80% for small pools
    double prev = 0.0;
    for (int n = 2; n <= 30; ++n) {
        const double f = signature_fraction(n);
        EXPECT_GT(f, prev);
        prev = f;
    }
    EXPECT_GT(signature_fraction(30), 0.9999);
    EXPECT_LT(signature_fraction(30), 1.0);
}

TEST(FindBestTrade, EquilibriumPoolIsNoArb) {
    const auto pool = equal_pool(3, 0.997);
    const MarketPrices m{{1.0, 1.0, 1.0}};
    const auto res = find_best_trade(pool, m);
    EXPECT_FALSE(res.best.valid);
    EXPECT_EQ(res.best.profit, 0.0);
    EXPECT_EQ(res.best.phi, std::vector<double>(3, 0.0));
    EXPECT_EQ(res.evaluated_count, 12u);
}

TEST(FindBestTrade, WorkedTwoTokenInstance) {
    const PoolState pool{{100.0, 100.0}, {0.5, 0.5}, 1.0, 1.0};
    const MarketPrices m{{1.1, 1.0}};
    const auto res = find_best_trade(pool, m);
    ASSERT_TRUE(res.best.valid);
    EXPECT_EQ(res.best.signature.entries, (std::vector<std::int8_t>{-1, 1}));
    EXPECT_NEAR(res.best.profit, 210.0 - 200.0 * std::sqrt(1.1), 1e-10);
}

// Basket trades dominate or match the best pure swap.
TEST(FindBestTrade, BasketBeatsSwapsOnThreeTokens) {
    const PoolState pool{{100.0, 100.0, 100.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.99, 1.0};
    const MarketPrices m{{1.2, 1.0, 0.8}};
    const auto res = find_best_trade(pool, m, SearchOptions{.collect_all = true});
    ASSERT_TRUE(res.best.valid);

    double best_swap = 0.0;
    ASSERT_TRUE(res.all_solutions.has_value());
    for (const auto& sol : *res.all_solutions)
        if (sol.valid && sol.signature.active_count() == 2)
            best_swap = std::max(best_swap, sol.profit);
    EXPECT_GT(best_swap, 0.0);
    EXPECT_GE(res.best.profit, best_swap);
    EXPECT_EQ(res.best.signature.active_count(), 3u);
}

TEST(FindBestTrade, SupersetDominanceProperty) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        InstanceParams params;
        params.n_tokens = 3 + static_cast<int>(rng() % 3);
        auto [pool, prices] = sample_instance(params, rng());
        const auto res = find_best_trade(pool, prices, SearchOptions{.threads = 1, .collect_all = true});
        double best_swap = 0.0;
        for (const auto& sol : *res.all_solutions)
            if (sol.valid && sol.signature.active_count() == 2)
                best_swap = std::max(best_swap, sol.profit);
        EXPECT_GE(res.best.profit, best_swap - 1e-12 * (1.0 + best_swap));
    }
}

TEST(FindBestTrade, DeterministicAcrossThreadCounts) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        InstanceParams params;
        params.n_tokens = 2 + static_cast<int>(rng() % 5);
        auto [pool, prices] = sample_instance(params, rng());
        const auto one = find_best_trade(pool, prices, SearchOptions{.threads = 1});
        const auto two = find_best_trade(pool, prices, SearchOptions{.threads = 2});
        const auto many = find_best_trade(pool, prices, SearchOptions{.threads = 0});
        EXPECT_EQ(one.best.phi, two.best.phi);
        EXPECT_EQ(one.best.phi, many.best.phi);
        EXPECT_EQ(one.best.profit, two.best.profit);
        EXPECT_EQ(one.best.profit, many.best.profit);
        EXPECT_EQ(one.best.signature.entries, many.best.signature.entries);
    }
}

// If the search returns the zero trade, no signature can produce a valid
// profitable solution.
TEST(FindBestTrade, NoArbClosure) {
    std::mt19937_64 rng(111);
    int no_arb_seen = 0;
    for (int trial = 0; trial < 300 && no_arb_seen < 30; ++trial) {
        InstanceParams params;
        params.n_tokens = 2 + static_cast<int>(rng() % 3);
        params.fee_gamma = 0.9;        // wide no-arb band
        params.price_spread = 0.05;    // small shocks stay inside it
        auto [pool, prices] = sample_instance(params, rng());
        const auto res = find_best_trade(pool, prices, SearchOptions{.threads = 1, .collect_all = true});
        if (res.best.profit != 0.0) continue;
        ++no_arb_seen;
        for (const auto& sol : *res.all_solutions) EXPECT_FALSE(sol.valid && sol.profit > 0.0);
    }
    EXPECT_GE(no_arb_seen, 10);
}

// With two interchangeable payment tokens the basket splits the inward leg
// across both (curvature of the invariant favours spreading) and the two legs
// come out bitwise equal.
TEST(FindBestTrade, SymmetricTokensSplitEvenly) {
    const PoolState pool{{100.0, 100.0, 100.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0, 1.0};
    const MarketPrices m{{1.1, 1.0, 1.0}};  // tokens 1 and 2 interchangeable
    const auto res = find_best_trade(pool, m);
    ASSERT_TRUE(res.best.valid);
    EXPECT_EQ(res.best.signature.entries, (std::vector<std::int8_t>{-1, 1, 1}));
    EXPECT_EQ(res.best.phi[1], res.best.phi[2]);

    // and it beats the best two-token swap outright
    const auto swap = optimal_phi(pool, m, TradeSignature{{-1, 1, 0}});
    ASSERT_TRUE(swap.valid);
    EXPECT_GT(res.best.profit, swap.profit);
}

// Tie-break contract on the winner scan itself: near-equal profits prefer
// fewer active tokens, then the earlier canonical code; a profit gap beyond
// the tie tolerance always wins.
TEST(FindBestTrade, WinnerScanTieBreaks) {
    using detail::select_winner;
    const double p = 1.0;
    {
        std::vector<double> profit{-1.0, p, p * (1.0 + 5e-13), p * (1.0 - 5e-13)};
        std::vector<std::uint8_t> active{2, 3, 2, 4};
        EXPECT_EQ(select_winner(profit, active), 2u);  // tie on profit, fewest active
    }
    {
        std::vector<double> profit{p, p, p};
        std::vector<std::uint8_t> active{2, 2, 2};
        EXPECT_EQ(select_winner(profit, active), 0u);  // full tie: earliest code
    }
    {
        std::vector<double> profit{p, p * (1.0 + 1e-9)};
        std::vector<std::uint8_t> active{2, 4};
        EXPECT_EQ(select_winner(profit, active), 1u);  // clear win beats fewer active
    }
    {
        std::vector<double> profit{0.0, -2.0};
        std::vector<std::uint8_t> active{2, 2};
        EXPECT_EQ(select_winner(profit, active), profit.size());  // nothing profitable
    }
}

TEST(FindBestTrade, RefusesOversizedPools) {
    const int n = 13;
    PoolState pool{std::vector<double>(n, 100.0), std::vector<double>(n, 1.0 / n), 0.997, 1.0};
    MarketPrices m{std::vector<double>(n, 1.0)};
    EXPECT_THROW(find_best_trade(pool, m), std::invalid_argument);
}

TEST(Heuristic, EquilibriumGivesNoSignature) {
    const auto pool = equal_pool(4, 0.997);
    const MarketPrices m{{1.0, 1.0, 1.0, 1.0}};
    EXPECT_FALSE(heuristic_signature(pool, m).has_value());
}

// l = (1.05, 1.0, 0.94) with gamma = 0.99: tokens 1 and 3 escape the fee
// band; token 2 sits exactly at l = 1 and is left out.
TEST(Heuristic, PriceQuotientExample) {
    const std::vector<double> l{1.05, 1.0, 0.94};
    // pick weights with sum w_i / l_i = 1 so that l is realisable, R = 1
    const double w2 = 0.3;
    const double a = 1.0 / l[0], c = 1.0 / l[2];
    const double w1 = (1.0 - w2 - 0.7 * c) / (a - c);
    const double w3 = 0.7 - w1;
    PoolState pool{{1.0, 1.0, 1.0}, {w1, w2, w3}, 0.99, 1.0};
    pool.validate();
    MarketPrices m{{pool.weights[0] / l[0], pool.weights[1] / l[1], pool.weights[2] / l[2]}};

    const auto sig = heuristic_signature(pool, m);
    ASSERT_TRUE(sig.has_value());
    EXPECT_EQ(sig->entries, (std::vector<std::int8_t>{1, 0, -1}));
}

// Measured agreement between the heuristic and the brute-force best
// signature on shocked instances. No exact rate is guaranteed; require the
// sanity floor and print the measurement.
TEST(Heuristic, AgreementRateOnShockedInstances) {
    std::mt19937_64 rng(131);
    int agree = 0, proposed = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        InstanceParams params;
        params.n_tokens = 3;
        params.fee_gamma = 0.99;
        params.price_spread = 0.3;  // well outside the no-arb region
        auto [pool, prices] = sample_instance(params, rng());
        const auto best = find_best_trade(pool, prices, SearchOptions{.threads = 1}).best;
        if (!best.valid) continue;
        const auto guess = heuristic_signature(pool, prices);
        ++proposed;
        if (guess.has_value() && guess->entries == best.signature.entries) ++agree;
    }
    ASSERT_GT(proposed, 500);
    const double rate = static_cast<double>(agree) / proposed;
    std::printf("heuristic agreement: %d/%d = %.1f%%\n", agree, proposed, 100.0 * rate);
    EXPECT_GE(rate, 0.5);
}
