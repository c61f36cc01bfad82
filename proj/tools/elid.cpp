// Command-line front end: solve, sweep, figure, oracle-check.

#include <CLI11.hpp>

#include "elid/cli.hpp"

int main(int argc, char** argv) {
    using elid::cli::invocation;

    CLI::App app{"Finite-blocklength downlink resource allocation for an elevated LiDAR cell"};
    app.require_subcommand(1);
    invocation inv;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", inv.config_path, "flat key=value config file");
        sub->add_option("--set", inv.overrides, "override KEY=VALUE (repeatable)");
        sub->add_option("--seed", inv.seed, "64-bit seed");
        sub->add_option("--out", inv.output_path, "output file or directory");
    };

    auto* solve = app.add_subcommand("solve", "sample one scenario and run one solver");
    common(solve);
    solve->add_option("--n", inv.n, "number of vehicles")->default_val(1);
    solve->add_option("--solver", inv.solver,
                      "joint_minmax | power_minmax_fixed_m | symbols_minmax_fixed_p | symbol_sharing | equal_allocation")
        ->default_val("symbol_sharing");

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep with one solver");
    common(sweep);
    sweep->add_option("--vary", inv.vary, "n_vehicles | symbol_budget")->default_val("n_vehicles");
    sweep->add_option("--values", inv.values, "swept values")->delimiter(',')->required();
    sweep->add_option("--n", inv.n, "vehicles when sweeping the symbol budget")->default_val(5);
    sweep->add_option("--solver", inv.solver, "solver name")->default_val("symbol_sharing");
    sweep->add_option("--metrics", inv.metrics, "metric names")->delimiter(',');
    sweep->add_option("--seeds", inv.num_seeds, "seeds per swept value");
    sweep->add_option("--threads", inv.threads, "worker threads")->default_val(1);

    auto* figure = app.add_subcommand("figure", "run a figure preset (4-8)");
    common(figure);
    figure->add_option("id", inv.figure_id, "figure id")->required();
    figure->add_option("--seeds", inv.num_seeds, "seeds per swept value");
    figure->add_option("--threads", inv.threads, "worker threads")->default_val(1);

    auto* oracle = app.add_subcommand("oracle-check", "randomized oracle-equivalence suites");
    common(oracle);
    oracle->add_option("--instances", inv.instances, "number of random instances")->default_val(240);
    oracle->add_option("--n-values", inv.n_values, "vehicle counts to cycle through")->delimiter(',');
    oracle->add_flag("--force-failure", inv.force_failure, "test hook: corrupt one comparison");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : elid::cli::exit_error;
    }

    if (solve->parsed()) {
        inv.subcommand = "solve";
        return elid::cli::cmd_solve(inv);
    }
    if (sweep->parsed()) {
        inv.subcommand = "sweep";
        return elid::cli::cmd_sweep(inv);
    }
    if (figure->parsed()) {
        inv.subcommand = "figure";
        return elid::cli::cmd_figure(inv);
    }
    inv.subcommand = "oracle-check";
    return elid::cli::cmd_oracle_check(inv);
}
