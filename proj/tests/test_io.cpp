#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "g3arb/io.hpp"
#include "g3arb/signature_search.hpp"

using namespace g3arb;
using nlohmann::json;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST(JsonIo, PoolRoundTrip) {
    const PoolState pool{{100.0, 200.5, 1.0 / 3.0}, {0.2, 0.3, 0.5}, 0.997, 2.0};
    const auto parsed = io::pool_from_json(io::pool_to_json(pool));
    EXPECT_EQ(parsed.reserves, pool.reserves);  // exact double round-trip
    EXPECT_EQ(parsed.weights, pool.weights);
    EXPECT_EQ(parsed.fee_gamma, pool.fee_gamma);
    EXPECT_EQ(parsed.amplification, pool.amplification);
}

TEST(JsonIo, PoolDefaultsAndErrors) {
    const auto pool = io::pool_from_json(json::parse(
        R"({"reserves":[100,100],"weights":[0.5,0.5]})"));
    EXPECT_EQ(pool.fee_gamma, 1.0);
    EXPECT_EQ(pool.amplification, 1.0);

    try {
        io::pool_from_json(json::parse(R"({"weights":[0.5,0.5]})"));
        FAIL() << "expected error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("reserves"), std::string::npos);
    }
    try {
        io::pool_from_json(json::parse(R"({"reserves":[100,"x"],"weights":[0.5,0.5]})"));
        FAIL() << "expected error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("reserves"), std::string::npos);
    }
    EXPECT_THROW(io::pool_from_json(json::parse(R"({"reserves":[100,100],"weights":[0.9,0.5]})")),
                 std::invalid_argument);
}

TEST(JsonIo, PricesParsing) {
    const auto prices = io::prices_from_json(json::parse(R"({"prices":[1.5,2.5]})"));
    EXPECT_EQ(prices.prices, (std::vector<double>{1.5, 2.5}));
    EXPECT_THROW(io::prices_from_json(json::parse(R"({"prices":[1.5,-2.5]})")),
                 std::invalid_argument);
    EXPECT_THROW(io::prices_from_json(json::parse(R"({})")), std::runtime_error);
}

TEST(JsonIo, SolutionRoundTripVerifies) {
    const PoolState pool{{100.0, 100.0}, {0.5, 0.5}, 1.0, 1.0};
    const MarketPrices prices{{1.1, 1.0}};
    const auto best = find_best_trade(pool, prices).best;
    ASSERT_TRUE(best.valid);

    const auto j = io::solution_to_json(best);
    const auto verified = io::solution_from_json(j, pool, prices);
    EXPECT_EQ(verified.phi, best.phi);
    EXPECT_EQ(verified.profit, best.profit);
    EXPECT_TRUE(verified.valid);
    EXPECT_LE(std::abs(verified.invariant_residual), kResidualTol);

    // delta/lambda in the emitted JSON recombine to phi
    const auto delta = j["delta"].get<std::vector<double>>();
    const auto lambda = j["lambda"].get<std::vector<double>>();
    for (std::size_t i = 0; i < best.phi.size(); ++i)
        EXPECT_EQ(delta[i] - lambda[i], best.phi[i]);
}

TEST(JsonIo, FileLoading) {
    const auto pool_path = write_temp("g3arb_pool.json",
                                      R"({"reserves":[100,100],"weights":[0.5,0.5],"fee_gamma":0.997})");
    const auto pool = io::load_pool(pool_path);
    EXPECT_EQ(pool.fee_gamma, 0.997);

    const auto bad_path = write_temp("g3arb_pool_bad.json", "{not json");
    EXPECT_THROW(io::load_pool(bad_path), std::runtime_error);
    EXPECT_THROW(io::load_pool("/nonexistent.json"), std::runtime_error);
}

TEST(CsvIo, TrialRecordsWriteAndSummarize) {
    std::vector<TrialRecord> records(3);
    for (int i = 0; i < 3; ++i) {
        records[i].trial_id = i;
        records[i].closed_form_profit = 1.0 + i;
        records[i].baseline_profit = 0.5 + i;
        records[i].profit_gap = 0.5;
        records[i].closed_form_time_s = 1e-5;
        records[i].baseline_time_s = 1e-3;
    }
    records[2].error = "solver blew up";

    const auto path = (std::filesystem::temp_directory_path() / "g3arb_trials.csv").string();
    io::write_trials_csv(path, records);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line,
              "trial_id,closed_form_profit,baseline_profit,profit_gap,"
              "closed_form_time_s,baseline_time_s,baseline_converged,error");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 3);

    const auto summary = io::trials_summary(records);
    EXPECT_EQ(summary["trials"], 3u);
    EXPECT_EQ(summary["errors"], 1u);
    EXPECT_DOUBLE_EQ(summary["mean_profit_gap"].get<double>(), 0.5);
    EXPECT_DOUBLE_EQ(summary["weak_dominance_rate"].get<double>(), 1.0);
}

TEST(CsvIo, DuelRecordsWrite) {
    DuelResult result;
    result.first = ArbAlgo::Baseline;
    result.second = ArbAlgo::ClosedForm;
    result.initial_pool_value = 1e6;
    result.records.push_back(DuelRecord{0, 0.0, 1e-4, {10.0, 20.0}});
    result.records.push_back(DuelRecord{1, 2e-4, 3e-4, {11.0, 19.0}});
    result.final_a_profit = 200.0;
    result.final_b_profit = 300.0;

    const auto path = (std::filesystem::temp_directory_path() / "g3arb_duel.csv").string();
    io::write_duel_csv(path, result);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "step,arb_a_profit,arb_b_profit,reserve_0,reserve_1");

    const auto summary = io::duel_summary(result);
    EXPECT_EQ(summary["arb_a"], "baseline");
    EXPECT_EQ(summary["arb_b"], "closed");
    EXPECT_DOUBLE_EQ(summary["final_b_fraction"].get<double>(), 3e-4);
}
