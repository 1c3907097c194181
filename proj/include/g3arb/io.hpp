// JSON serialization for pools, prices and trade solutions, and CSV output
// for simulation records.
#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "sim.hpp"

namespace g3arb::io {

using nlohmann::json;

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return j;
}

inline std::vector<double> number_array(const json& j, const std::string& field) {
    if (!j.contains(field)) throw std::runtime_error("missing field '" + field + "'");
    if (!j[field].is_array()) throw std::runtime_error("field '" + field + "' must be an array");
    std::vector<double> out;
    out.reserve(j[field].size());
    for (const auto& v : j[field]) {
        if (!v.is_number()) throw std::runtime_error("field '" + field + "' must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline double number_or(const json& j, const std::string& field, double fallback) {
    if (!j.contains(field)) return fallback;
    if (!j[field].is_number()) throw std::runtime_error("field '" + field + "' must be a number");
    return j[field].get<double>();
}

inline PoolState pool_from_json(const json& j) {
    PoolState pool;
    pool.reserves = number_array(j, "reserves");
    pool.weights = number_array(j, "weights");
    pool.fee_gamma = number_or(j, "fee_gamma", 1.0);
    pool.amplification = number_or(j, "amplification", 1.0);
    pool.validate();
    return pool;
}

inline MarketPrices prices_from_json(const json& j) {
    MarketPrices prices{number_array(j, "prices")};
    prices.validate();
    return prices;
}

inline PoolState load_pool(const std::string& path) {
    try {
        return pool_from_json(load_json_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error("pool file " + path + ": " + e.what());
    }
}

inline MarketPrices load_prices(const std::string& path) {
    try {
        return prices_from_json(load_json_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error("prices file " + path + ": " + e.what());
    }
}

inline json pool_to_json(const PoolState& pool) {
    return json{{"reserves", pool.reserves},
                {"weights", pool.weights},
                {"fee_gamma", pool.fee_gamma},
                {"amplification", pool.amplification}};
}

inline json prices_to_json(const MarketPrices& prices) { return json{{"prices", prices.prices}}; }

inline json solution_to_json(const TradeSolution& sol) {
    const auto legs = split_phi(sol);
    std::vector<int> sig(sol.signature.entries.begin(), sol.signature.entries.end());
    return json{{"phi", sol.phi},
                {"delta", legs.delta},
                {"lambda", legs.lambda},
                {"signature", sig},
                {"profit", sol.profit},
                {"invariant_residual", sol.invariant_residual},
                {"valid", sol.valid}};
}

// Rebuilds a solution from its JSON form (as printed by solution_to_json or
// hand-written with at least "phi") against a concrete pool and prices, so a
// previously emitted trade can be re-verified.
inline TradeSolution solution_from_json(const json& j, const PoolState& pool,
                                        const MarketPrices& prices) {
    const auto phi = number_array(j, "phi");
    if (phi.size() != pool.size())
        throw std::runtime_error("field 'phi' has length " + std::to_string(phi.size()) +
                                 ", expected " + std::to_string(pool.size()));
    TradeSignature sig = TradeSignature::none(pool.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        sig.entries[i] = phi[i] > 0.0 ? 1 : (phi[i] < 0.0 ? -1 : 0);
    return detail::finalize_solution(pool, prices, std::move(sig), phi);
}

// ------------------------------------------------------------------- CSV

inline std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

inline void write_trials_csv(const std::string& path, const std::vector<TrialRecord>& records) {
    std::ostringstream out;
    out << "trial_id,closed_form_profit,baseline_profit,profit_gap,"
           "closed_form_time_s,baseline_time_s,baseline_converged,error\n";
    for (const auto& r : records) {
        out << r.trial_id << ',' << fmt(r.closed_form_profit) << ',' << fmt(r.baseline_profit) << ','
            << fmt(r.profit_gap) << ',' << fmt(r.closed_form_time_s) << ',' << fmt(r.baseline_time_s)
            << ',' << (r.baseline_converged ? 1 : 0) << ',' << r.error << '\n';
    }
    write_file(path, out.str());
}

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline json trials_summary(const std::vector<TrialRecord>& records) {
    std::vector<double> gaps, closed, baseline, t_closed, t_baseline;
    std::size_t errors = 0, weakly_dominated = 0, strict_wins = 0;
    for (const auto& r : records) {
        if (!r.error.empty()) {
            ++errors;
            continue;
        }
        gaps.push_back(r.profit_gap);
        closed.push_back(r.closed_form_profit);
        baseline.push_back(r.baseline_profit);
        t_closed.push_back(r.closed_form_time_s);
        t_baseline.push_back(r.baseline_time_s);
        weakly_dominated += (r.profit_gap >= -1e-6);
        strict_wins += (r.profit_gap > 1e-6);
    }
    auto mean = [](const std::vector<double>& v) {
        if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const double count = static_cast<double>(gaps.size());
    return json{{"trials", records.size()},
                {"errors", errors},
                {"mean_closed_profit", mean(closed)},
                {"mean_baseline_profit", mean(baseline)},
                {"mean_profit_gap", mean(gaps)},
                {"gap_quantiles",
                 {{"p05", quantile(gaps, 0.05)},
                  {"p25", quantile(gaps, 0.25)},
                  {"p50", quantile(gaps, 0.50)},
                  {"p75", quantile(gaps, 0.75)},
                  {"p95", quantile(gaps, 0.95)}}},
                {"weak_dominance_rate", count > 0 ? weakly_dominated / count : 0.0},
                {"strict_win_rate", count > 0 ? strict_wins / count : 0.0},
                {"mean_closed_time_s", mean(t_closed)},
                {"mean_baseline_time_s", mean(t_baseline)}};
}

inline void write_duel_csv(const std::string& path, const DuelResult& result) {
    std::ostringstream out;
    out << "step,arb_a_profit,arb_b_profit";
    const std::size_t n = result.records.empty() ? 0 : result.records.front().pool_reserves_after.size();
    for (std::size_t i = 0; i < n; ++i) out << ",reserve_" << i;
    out << '\n';
    for (const auto& r : result.records) {
        out << r.step << ',' << fmt(r.arb_a_profit) << ',' << fmt(r.arb_b_profit);
        for (double x : r.pool_reserves_after) out << ',' << fmt(x);
        out << '\n';
    }
    write_file(path, out.str());
}

inline json duel_summary(const DuelResult& result) {
    return json{{"steps", result.records.size()},
                {"arb_a", to_string(result.first)},
                {"arb_b", to_string(result.second)},
                {"initial_pool_value", result.initial_pool_value},
                {"trades_a", result.trades_a},
                {"trades_b", result.trades_b},
                {"final_a_profit", result.final_a_profit},
                {"final_b_profit", result.final_b_profit},
                {"final_a_fraction", result.records.empty() ? 0.0 : result.records.back().arb_a_profit},
                {"final_b_fraction", result.records.empty() ? 0.0 : result.records.back().arb_b_profit}};
}

}  // namespace g3arb::io
