#pragma once

// Command-line surface: solve, simulate, sweep-lambda, sweep-delta,
// bank-check and verify.
//
// Exit codes: 0 success, 1 verify found a failing invariant, 2 parse or
// validation error, 3 regime mismatch or violated precondition, 4 numerical
// or other runtime failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "radner/analysis.hpp"
#include "radner/equilibrium.hpp"
#include "radner/io.hpp"
#include "radner/simulate.hpp"
#include "radner/verify.hpp"

namespace radner {

namespace cli {

struct Options {
    std::string config_path;
    std::string out_path;
    std::string grid;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> steps;
    std::optional<std::uint64_t> seed;
    std::optional<double> rho;
    std::string mode;
    std::optional<double> override_rate;
};

inline MarketParams resolve_market(const Config& cfg, const std::string& mode) {
    if (mode.empty()) return cfg.market();
    if (mode == "continuous") return {cfg.lambda, Continuous{}};
    if (!cfg.delta) throw ValidationError({"--mode discrete needs delta in the configuration"});
    return {cfg.lambda, Discrete{*cfg.delta}};
}

inline SimConfig resolve_sim(const Config& cfg, const Options& o) {
    SimConfig sc = cfg.sim.value_or(SimConfig{});
    if (o.paths) sc.n_paths = *o.paths;
    if (o.steps) sc.n_steps = *o.steps;
    if (o.seed) sc.seed = *o.seed;
    if (o.rho) sc.rho = *o.rho;
    if (sc.n_paths < 1 || sc.n_steps < 1 || !(std::abs(sc.rho) <= 1.0))
        throw ValidationError({"simulation needs paths >= 1, steps >= 1 and rho in [-1,1]"});
    return sc;
}

inline double require_delta(const MarketParams& m, const char* what) {
    if (const auto* d = std::get_if<Discrete>(&m.grid)) return d->delta;
    throw ValidationError({std::string(what) + " needs a discrete grid (set delta in the configuration)"});
}

inline std::vector<double> require_grid(const Options& o) {
    if (o.grid.empty()) throw ValidationError({"--grid is required for sweeps"});
    return parse_grid(o.grid);
}

inline int dispatch(const std::string& command, const Options& o, std::ostream& out, std::ostream& err) {
    const Config cfg = load_config_file(o.config_path);
    const MarketParams market = resolve_market(cfg, o.mode);

    if (command == "solve") {
        out << to_json(solve(cfg.agents, market)).dump(2) << '\n';
        return 0;
    }
    if (command == "simulate") {
        require_delta(market, "simulate");
        const SimConfig sc = resolve_sim(cfg, o);
        const EquilibriumSolution s = solve(cfg.agents, market);
        write_paths_csv(out, simulate_equilibrium_paths(s, simulate_income(cfg.agents, market, sc)));
        return 0;
    }
    if (command == "sweep-lambda") {
        const auto grid = require_grid(o);
        if (is_discrete(market.grid)) {
            std::vector<SweepRow> rows;
            auto lambdas = grid;
            std::stable_sort(lambdas.begin(), lambdas.end());
            for (double lam : lambdas) rows.push_back(sweep_row(lam, solve(cfg.agents, {lam, market.grid})));
            write_sweep_csv(out, rows);
        } else {
            write_sweep_csv(out, sweep_lambda(cfg.agents, grid));
        }
        return 0;
    }
    if (command == "sweep-delta") {
        const DeltaSweep sweep = sweep_delta(cfg.agents, cfg.lambda, require_grid(o));
        write_sweep_csv(out, sweep.rows);
        err << "# r0=" << format_number(sweep.r0) << " order=" << format_number(sweep.order)
            << " constant=" << format_number(sweep.constant) << '\n';
        return 0;
    }
    if (command == "bank-check") {
        const double delta = require_delta(market, "bank-check");
        out << to_json(check_bank_constant_equilibrium(cfg.agents, cfg.lambda, delta)).dump(2) << '\n';
        return 0;
    }
    if (command == "verify") {
        EquilibriumSolution s = solve(cfg.agents, market);
        if (o.override_rate) s = with_market_rate(s, *o.override_rate);
        const SimConfig sc = is_discrete(market.grid) ? resolve_sim(cfg, o) : SimConfig{};
        bool all = true;
        for (const auto& r : run_invariant_suite(s, sc)) {
            out << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
            all = all && r.passed;
        }
        if (!all) err << "verify: one or more invariants failed\n";
        return all ? 0 : 1;
    }
    throw ValidationError({"unknown command '" + command + "'"});
}

} // namespace cli

/// Runs the CLI on `args` (program name excluded), writing results to `out`
/// (or to --out) and diagnostics to `err`. Returns the process exit code.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-agent annuity equilibrium with proportional transaction costs", "radner"};
    app.require_subcommand(1);
    cli::Options o;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"solve", "equilibrium as JSON"},
        {"simulate", "equilibrium paths as CSV"},
        {"sweep-lambda", "equilibrium rate over a lambda grid as CSV"},
        {"sweep-delta", "discrete rate over a delta grid against the continuous limit as CSV"},
        {"bank-check", "constant-rate bank-account equilibrium verdict as JSON"},
        {"verify", "run the invariant suite; exit 1 on any failure"},
    };
    std::string chosen;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->callback([&chosen, n = name] { chosen = n; });
    }
    app.add_option("--config", o.config_path, "configuration JSON")->required();
    app.add_option("--out", o.out_path, "write results here instead of standard output");
    app.add_option("--grid", o.grid, "start:stop:step or a comma list");
    app.add_option("--paths", o.paths, "number of simulated paths");
    app.add_option("--steps", o.steps, "number of time steps");
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--rho", o.rho, "income shock correlation");
    app.add_option("--mode", o.mode, "discrete|continuous")->check(CLI::IsMember({"discrete", "continuous"}));
    app.add_option("--override-rate", o.override_rate, "verify a perturbed market rate instead of the solved one");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (o.override_rate && chosen != "verify") throw ValidationError({"--override-rate applies to verify only"});
        if (!o.out_path.empty()) {
            std::ofstream file(o.out_path, std::ios::binary);
            if (!file) throw ParseError("cannot open output file '" + o.out_path + "'");
            const int code = cli::dispatch(chosen, o, file, err);
            file.flush();
            if (!file) throw Error("failed writing '" + o.out_path + "'");
            return code;
        }
        return cli::dispatch(chosen, o, out, err);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        err << "validation error:\n";
        for (const auto& p : e.problems()) err << "  " << p << '\n';
        return 2;
    } catch (const InvalidParams& e) {
        err << "invalid parameters: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "invalid parameters: " << e.what() << '\n';
        return 2;
    } catch (const RegimeMismatch& e) {
        err << "regime mismatch: " << e.what() << '\n';
        return 3;
    } catch (const PreconditionViolated& e) {
        err << "precondition violated: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    }
}

} // namespace radner
