// g3arb: closed-form arbitrage trades for N-token geometric-mean pools.
// Subcommands: arb, enumerate, trials, duel, bench, oracle.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "g3arb/baseline.hpp"
#include "g3arb/bench.hpp"
#include "g3arb/closed_form.hpp"
#include "g3arb/io.hpp"
#include "g3arb/signature_search.hpp"
#include "g3arb/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoArb = 3;

using g3arb::io::json;

std::string out_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void add_solver_flags(CLI::App* cmd, g3arb::SolverConfig& solver) {
    cmd->add_option("--solver-iters", solver.max_iterations, "baseline iteration budget");
    cmd->add_option("--solver-step", solver.step_size, "baseline initial step size");
    cmd->add_option("--solver-penalty", solver.penalty_weight, "baseline initial barrier weight");
    cmd->add_option("--solver-tol", solver.convergence_tol, "baseline convergence tolerance");
}

struct ArbArgs {
    std::string pool_file, prices_file, check_file;
    std::string method = "closed";
    unsigned threads = 0;
    std::uint64_t seed = 0;
    bool all = false;
    g3arb::SolverConfig solver{};
};

int run_arb(const ArbArgs& args) {
    const auto pool = g3arb::io::load_pool(args.pool_file);
    const auto prices = g3arb::io::load_prices(args.prices_file);
    if (prices.size() != pool.size())
        throw std::runtime_error("prices file has " + std::to_string(prices.size()) +
                                 " entries, pool has " + std::to_string(pool.size()));

    if (!args.check_file.empty()) {
        const auto j = g3arb::io::load_json_file(args.check_file);
        const auto verified = g3arb::io::solution_from_json(j, pool, prices);
        json out = g3arb::io::solution_to_json(verified);
        out["no_arb"] = !(verified.valid && verified.profit > 0.0);
        std::cout << out.dump(2) << "\n";
        return verified.valid && verified.profit > 0.0 ? kExitOk : kExitNoArb;
    }

    g3arb::TradeSolution best;
    json extra;
    if (args.method == "closed") {
        const auto res = g3arb::find_best_trade(
            pool, prices, g3arb::SearchOptions{.threads = args.threads, .collect_all = args.all});
        best = res.best;
        extra["evaluated_count"] = res.evaluated_count;
        if (args.all && res.all_solutions) {
            json all = json::array();
            for (const auto& sol : *res.all_solutions) all.push_back(g3arb::io::solution_to_json(sol));
            extra["all_solutions"] = std::move(all);
        }
    } else {
        g3arb::SolverConfig solver = args.solver;
        solver.seed = args.seed;
        const auto res = g3arb::solve_numerical(pool, prices, solver);
        best = res.trade;
        extra["converged"] = res.converged;
        extra["iterations"] = res.iterations;
    }

    json out = g3arb::io::solution_to_json(best);
    out["method"] = args.method;
    out["no_arb"] = !(best.valid && best.profit > 0.0);
    out.update(extra);
    std::cout << out.dump(2) << "\n";
    return best.valid && best.profit > 0.0 ? kExitOk : kExitNoArb;
}

struct EnumArgs {
    int n = 3;
    bool list = false;
    bool fraction = false;
};

int run_enumerate(const EnumArgs& args) {
    if (args.list) {
        const auto set = g3arb::enumerate_signatures(args.n);
        for (const auto& sig : set.signatures) {
            std::string line;
            for (std::size_t i = 0; i < sig.entries.size(); ++i) {
                if (i) line += ',';
                line += sig.entries[i] > 0 ? "+1" : (sig.entries[i] < 0 ? "-1" : "0");
            }
            std::cout << line << "\n";
        }
        return kExitOk;
    }
    json out{{"n_tokens", args.n}, {"count", g3arb::signature_count(args.n)}};
    if (args.fraction) out["fraction"] = g3arb::signature_fraction(args.n);
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

g3arb::TrialConfig trial_config_from_json(const json& j) {
    g3arb::TrialConfig cfg;
    cfg.n_tokens = static_cast<int>(g3arb::io::number_or(j, "n_tokens", cfg.n_tokens));
    cfg.n_trials = static_cast<int>(g3arb::io::number_or(j, "n_trials", cfg.n_trials));
    cfg.v0 = g3arb::io::number_or(j, "v0", cfg.v0);
    cfg.shock_scale = g3arb::io::number_or(j, "shock_scale", cfg.shock_scale);
    cfg.fee_gamma = g3arb::io::number_or(j, "fee_gamma", cfg.fee_gamma);
    cfg.weight_jitter = g3arb::io::number_or(j, "weight_jitter", cfg.weight_jitter);
    cfg.seed = static_cast<std::uint64_t>(g3arb::io::number_or(j, "seed", 0.0));
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        cfg.solver.max_iterations =
            static_cast<int>(g3arb::io::number_or(s, "max_iterations", cfg.solver.max_iterations));
        cfg.solver.step_size = g3arb::io::number_or(s, "step_size", cfg.solver.step_size);
        cfg.solver.penalty_weight = g3arb::io::number_or(s, "penalty_weight", cfg.solver.penalty_weight);
        cfg.solver.convergence_tol =
            g3arb::io::number_or(s, "convergence_tol", cfg.solver.convergence_tol);
    }
    return cfg;
}

int run_trials_cmd(const g3arb::TrialConfig& cfg, unsigned threads, const std::string& out_dir) {
    cfg.validate();
    const auto records = g3arb::run_trials(cfg, threads);
    std::filesystem::create_directories(out_dir);
    g3arb::io::write_trials_csv(out_path(out_dir, "trials.csv"), records);
    auto summary = g3arb::io::trials_summary(records);
    summary["config"] = json{{"n_tokens", cfg.n_tokens},   {"n_trials", cfg.n_trials},
                             {"v0", cfg.v0},               {"shock_scale", cfg.shock_scale},
                             {"fee_gamma", cfg.fee_gamma}, {"weight_jitter", cfg.weight_jitter},
                             {"seed", cfg.seed}};
    g3arb::io::write_file(out_path(out_dir, "trials_summary.json"), summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

struct DuelArgs {
    std::string series_file, pool_file, out_dir = ".";
    int n_tokens = 3;
    int steps = 10000;
    double vol = 0.002;
    double v0 = 1e6;
    double fee_gamma = 0.997;
    std::uint64_t seed = 42;
    std::string priority = "baseline";
    std::string solo;
    unsigned threads = 1;
    g3arb::SolverConfig solver{};
};

int run_duel_cmd(const DuelArgs& args) {
    g3arb::PriceSeries series;
    if (!args.series_file.empty()) {
        series = g3arb::load_price_series(args.series_file);
    } else {
        series = g3arb::synthetic_walk(args.n_tokens, args.steps, args.vol, args.seed);
    }

    g3arb::PoolState pool;
    if (!args.pool_file.empty()) {
        pool = g3arb::io::load_pool(args.pool_file);
    } else {
        const std::size_t n = series.tokens();
        pool = g3arb::equilibrium_pool(series.at(0), std::vector<double>(n, 1.0 / n), args.v0,
                                       args.fee_gamma);
    }

    g3arb::DuelConfig cfg;
    cfg.solver = args.solver;
    cfg.solver.seed = args.seed;
    cfg.search_threads = args.threads;
    if (!args.solo.empty()) {
        cfg.first = args.solo == "closed" ? g3arb::ArbAlgo::ClosedForm : g3arb::ArbAlgo::Baseline;
        cfg.second = g3arb::ArbAlgo::None;
    } else if (args.priority == "closed") {
        cfg.first = g3arb::ArbAlgo::ClosedForm;
        cfg.second = g3arb::ArbAlgo::Baseline;
    } else {
        cfg.first = g3arb::ArbAlgo::Baseline;
        cfg.second = g3arb::ArbAlgo::ClosedForm;
    }

    const auto result = g3arb::run_duel(series, pool, cfg);
    std::filesystem::create_directories(args.out_dir);
    g3arb::io::write_duel_csv(out_path(args.out_dir, "duel.csv"), result);
    auto summary = g3arb::io::duel_summary(result);
    summary["series"] = args.series_file.empty()
                            ? json{{"synthetic", true},
                                   {"steps", args.steps},
                                   {"volatility", args.vol},
                                   {"seed", args.seed}}
                            : json{{"file", args.series_file}};
    g3arb::io::write_file(out_path(args.out_dir, "duel_summary.json"), summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

struct BenchArgs {
    int n_min = 2, n_max = 7, instances = 30;
    bool baseline = false;
    std::uint64_t seed = 42;
    std::string out_dir = ".";
    g3arb::SolverConfig solver{};
};

int run_bench_cmd(const BenchArgs& args) {
    g3arb::BenchOptions opts;
    opts.n_min = args.n_min;
    opts.n_max = args.n_max;
    opts.instances = args.instances;
    opts.bench_baseline = args.baseline;
    opts.seed = args.seed;
    opts.solver = args.solver;
    const auto records = g3arb::run_bench(opts);
    std::filesystem::create_directories(args.out_dir);
    g3arb::io::write_file(out_path(args.out_dir, "bench.csv"), g3arb::bench_csv(records));

    json rows = json::array();
    for (const auto& r : records)
        rows.push_back(json{{"n_tokens", r.n_tokens},
                            {"method", r.method},
                            {"threads", r.threads},
                            {"median_time_s", r.median_time_s},
                            {"p95_time_s", r.p95_time_s},
                            {"instances", r.instances}});
    json summary{{"records", rows}};
    g3arb::io::write_file(out_path(args.out_dir, "bench_summary.json"), summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

struct OracleArgs {
    std::string pool_file, prices_file;
    int grid_points = 2001;
    int refinements = 1;
    double box_fraction = 0.5;
};

int run_oracle(const OracleArgs& args) {
    const auto pool = g3arb::io::load_pool(args.pool_file);
    const auto prices = g3arb::io::load_prices(args.prices_file);
    g3arb::GridOracleOptions opts;
    opts.grid_points = args.grid_points;
    opts.refinements = args.refinements;
    opts.box_fraction = args.box_fraction;
    const auto sol = g3arb::solve_grid_oracle(pool, prices, opts);
    json out = g3arb::io::solution_to_json(sol);
    out["method"] = "grid-oracle";
    out["grid_points"] = args.grid_points;
    out["no_arb"] = !(sol.valid && sol.profit > 0.0);
    std::cout << out.dump(2) << "\n";
    return sol.valid && sol.profit > 0.0 ? kExitOk : kExitNoArb;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed-form arbitrage for N-token geometric-mean market makers"};
    app.require_subcommand(1);

    ArbArgs arb;
    auto* cmd_arb = app.add_subcommand("arb", "best trade for a pool at given market prices");
    cmd_arb->add_option("--pool", arb.pool_file, "pool JSON file")->required();
    cmd_arb->add_option("--prices", arb.prices_file, "prices JSON file")->required();
    cmd_arb->add_option("--method", arb.method, "closed | baseline")
        ->check(CLI::IsMember({"closed", "baseline"}));
    cmd_arb->add_option("--threads", arb.threads, "search threads (0 = all cores)");
    cmd_arb->add_option("--seed", arb.seed, "baseline jitter seed");
    cmd_arb->add_flag("--all", arb.all, "include every signature's solution in the output");
    cmd_arb->add_option("--check", arb.check_file,
                        "re-verify a previously emitted solution JSON instead of solving");
    add_solver_flags(cmd_arb, arb.solver);

    EnumArgs enm;
    auto* cmd_enum = app.add_subcommand("enumerate", "count or list valid trade signatures");
    cmd_enum->add_option("n", enm.n, "number of pool tokens")->required();
    cmd_enum->add_flag("--list", enm.list, "print every signature (n <= 12)");
    cmd_enum->add_flag("--fraction", enm.fraction, "also print |S(n)| / 3^n");

    g3arb::TrialConfig trials_cfg;
    std::string trials_config_file, trials_out_dir = ".";
    unsigned trials_threads = 0;
    auto* cmd_trials = app.add_subcommand("trials", "independent synthetic arbitrage trials");
    cmd_trials->add_option("--config", trials_config_file, "trial config JSON file");
    auto* opt_nt = cmd_trials->add_option("--n-tokens", trials_cfg.n_tokens, "pool size");
    auto* opt_tr = cmd_trials->add_option("--n-trials", trials_cfg.n_trials, "number of trials");
    auto* opt_v0 = cmd_trials->add_option("--v0", trials_cfg.v0, "initial pool value");
    auto* opt_sh = cmd_trials->add_option("--shock", trials_cfg.shock_scale, "price shock scale a");
    auto* opt_fg = cmd_trials->add_option("--fee-gamma", trials_cfg.fee_gamma,
                                          "retained fraction gamma (fee = 1 - gamma)");
    auto* opt_wj = cmd_trials->add_option("--jitter", trials_cfg.weight_jitter, "weight jitter");
    auto* opt_sd = cmd_trials->add_option("--seed", trials_cfg.seed, "RNG seed");
    cmd_trials->add_option("--threads", trials_threads, "worker threads (0 = all cores)");
    cmd_trials->add_option("--out-dir", trials_out_dir, "output directory");
    add_solver_flags(cmd_trials, trials_cfg.solver);

    DuelArgs duel;
    auto* cmd_duel = app.add_subcommand("duel", "duelling arbitrageurs backtest");
    cmd_duel->add_option("--series", duel.series_file, "price series CSV (timestamp,token_0,...)");
    cmd_duel->add_option("--pool", duel.pool_file, "pool JSON (default: equilibrium at first prices)");
    cmd_duel->add_option("--n-tokens", duel.n_tokens, "tokens for the synthetic walk");
    cmd_duel->add_option("--steps", duel.steps, "synthetic walk length");
    cmd_duel->add_option("--vol", duel.vol, "synthetic per-step volatility");
    cmd_duel->add_option("--v0", duel.v0, "synthetic pool initial value");
    cmd_duel->add_option("--fee-gamma", duel.fee_gamma, "synthetic pool gamma (fee = 1 - gamma)");
    cmd_duel->add_option("--seed", duel.seed, "RNG seed");
    cmd_duel->add_option("--priority", duel.priority, "which arbitrageur trades first")
        ->check(CLI::IsMember({"baseline", "closed"}));
    cmd_duel->add_option("--solo", duel.solo, "run a single arbitrageur standalone")
        ->check(CLI::IsMember({"baseline", "closed"}));
    cmd_duel->add_option("--threads", duel.threads, "closed-form search threads");
    cmd_duel->add_option("--out-dir", duel.out_dir, "output directory");
    add_solver_flags(cmd_duel, duel.solver);

    BenchArgs bench;
    auto* cmd_bench = app.add_subcommand("bench", "timing sweep over pool sizes");
    cmd_bench->add_option("--n-min", bench.n_min, "smallest pool size");
    cmd_bench->add_option("--n-max", bench.n_max, "largest pool size");
    cmd_bench->add_option("--instances", bench.instances, "instances per cell (>= 30)");
    cmd_bench->add_flag("--baseline", bench.baseline, "also time the numerical baseline");
    cmd_bench->add_option("--seed", bench.seed, "instance seed");
    cmd_bench->add_option("--out-dir", bench.out_dir, "output directory");
    add_solver_flags(cmd_bench, bench.solver);

    OracleArgs oracle;
    auto* cmd_oracle = app.add_subcommand("oracle", "dense grid-search referee (N <= 3)");
    cmd_oracle->add_option("--pool", oracle.pool_file, "pool JSON file")->required();
    cmd_oracle->add_option("--prices", oracle.prices_file, "prices JSON file")->required();
    cmd_oracle->add_option("--grid-points", oracle.grid_points, "points per signature grid");
    cmd_oracle->add_option("--refinements", oracle.refinements, "refinement sweeps");
    cmd_oracle->add_option("--box", oracle.box_fraction, "search box as a fraction of reserves");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_arb->parsed()) return run_arb(arb);
        if (cmd_enum->parsed()) return run_enumerate(enm);
        if (cmd_trials->parsed()) {
            g3arb::TrialConfig cfg = trials_cfg;
            if (!trials_config_file.empty()) {
                cfg = trial_config_from_json(g3arb::io::load_json_file(trials_config_file));
                // explicit flags win over the config file
                if (opt_nt->count()) cfg.n_tokens = trials_cfg.n_tokens;
                if (opt_tr->count()) cfg.n_trials = trials_cfg.n_trials;
                if (opt_v0->count()) cfg.v0 = trials_cfg.v0;
                if (opt_sh->count()) cfg.shock_scale = trials_cfg.shock_scale;
                if (opt_fg->count()) cfg.fee_gamma = trials_cfg.fee_gamma;
                if (opt_wj->count()) cfg.weight_jitter = trials_cfg.weight_jitter;
                if (opt_sd->count()) cfg.seed = trials_cfg.seed;
            }
            return run_trials_cmd(cfg, trials_threads, trials_out_dir);
        }
        if (cmd_duel->parsed()) return run_duel_cmd(duel);
        if (cmd_bench->parsed()) return run_bench_cmd(bench);
        if (cmd_oracle->parsed()) return run_oracle(oracle);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
