#ifndef ELID_CLI_HPP
#define ELID_CLI_HPP

// Subcommand implementations behind tools/elid. Exit codes: 0 success,
// 1 internal or usage error, 2 infeasible problem.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "allocators.hpp"
#include "channel_model.hpp"
#include "config_io.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "oracle_check.hpp"

namespace elid::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_infeasible = 2;

struct invocation {
    std::string subcommand;
    std::optional<std::string> config_path;
    std::vector<std::string> overrides; // key=value
    std::uint64_t seed = 0;
    std::int64_t n = 1;
    std::string solver = "symbol_sharing";
    std::optional<std::filesystem::path> output_path;

    // figure / sweep
    int figure_id = 0;
    std::optional<std::int64_t> num_seeds;
    unsigned threads = 1;
    std::string vary = "n_vehicles";
    std::vector<std::int64_t> values;
    std::vector<std::string> metrics;

    // oracle-check
    std::int64_t instances = 240;
    std::vector<std::int64_t> n_values{1, 2, 3};
    bool force_failure = false;
};

/// Config precedence: base < file < --set overrides.
inline system_config resolve_config(const invocation& inv, system_config base = {}) {
    system_config c = inv.config_path ? parse_config(*inv.config_path, std::move(base)) : std::move(base);
    for (const auto& o : inv.overrides)
        apply_override(c, o);
    validate(c);
    return c;
}

inline void print_report(std::ostream& os, const alloc::solve_report& r) {
    char buf[256];
    os << "solver: " << r.solver_name << "  (" << r.iterations << " iterations, "
       << (r.converged ? "converged" : "not converged") << ")\n";
    os << "  vehicle        power [W]   symbols     margin g   log10(eps)\n";
    for (std::size_t i = 0; i < r.alloc.powers.size(); ++i) {
        std::snprintf(buf, sizeof buf, "  %7zu  %15.6e  %8lld  %11.5f  %11.4f%s\n", i, r.alloc.powers[i],
                      static_cast<long long>(r.alloc.blocklengths[i]), r.margins[i].g, r.margins[i].eps_log10,
                      r.clamped[i] ? "  (zero power)" : "");
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "  symbols used: %lld\n  total energy: %.9g J\n  worst margin: %.9g (log10 eps = %.6g)\n",
                  static_cast<long long>(r.alloc.symbols_used()), r.total_energy, r.worst.g, r.worst.eps_log10);
    os << buf;
}

/// Samples one scenario and runs one solver.
inline int cmd_solve(const invocation& inv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        auto cfg = resolve_config(inv);
        const auto kind = sweep::parse_solver(inv.solver);
        if (!kind) {
            err << "error: unknown solver '" << inv.solver << "'\n";
            return exit_error;
        }
        const auto s = channel::sample_scenario(cfg, inv.n, inv.seed);
        const auto report = sweep::run_solver(*kind, s);
        print_report(out, report);
        if (inv.output_path) {
            std::ofstream f(*inv.output_path, std::ios::binary);
            if (!f) {
                err << "error: cannot write " << inv.output_path->string() << '\n';
                return exit_error;
            }
            write_report(f, report);
        }
        return exit_ok;
    } catch (const infeasible_error& e) {
        err << "infeasible: " << e.what() << " [binding: " << to_string(e.bound()) << "]\n";
        return exit_infeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    }
}

namespace detail {

inline int write_sweep(const sweep::sweep_spec& spec, const std::filesystem::path& dir, std::ostream& out,
                       std::ostream& err) {
    const auto rows = sweep::run_sweep(spec);
    std::filesystem::create_directories(dir);
    const auto csv = dir / (spec.name + ".csv");
    const auto summary = dir / (spec.name + "_summary.csv");
    std::ofstream f(csv, std::ios::binary);
    std::ofstream g(summary, std::ios::binary);
    if (!f || !g) {
        err << "error: cannot write into " << dir.string() << '\n';
        return exit_error;
    }
    sweep::write_csv(f, rows);
    sweep::write_summary_csv(g, sweep::summarize(rows));
    out << "wrote " << csv.string() << " (" << rows.size() << " rows) and " << summary.string() << '\n';
    return exit_ok;
}

} // namespace detail

/// Runs a figure preset and writes <name>.csv and <name>_summary.csv into
/// the output directory.
inline int cmd_figure(const invocation& inv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    auto spec = sweep::preset(inv.figure_id);
    if (!spec) {
        err << "usage error: unknown figure " << inv.figure_id << " (expected 4, 5, 6, 7 or 8)\n";
        return exit_error;
    }
    try {
        spec->base_config = resolve_config(inv, spec->base_config);
        spec->base_seed = inv.seed;
        if (inv.num_seeds)
            spec->num_seeds = *inv.num_seeds;
        spec->threads = inv.threads;
        return detail::write_sweep(*spec, inv.output_path.value_or("."), out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    }
}

/// Custom sweep over n_vehicles or symbol_budget with one solver.
inline int cmd_sweep(const invocation& inv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        sweep::sweep_spec spec;
        spec.name = "sweep";
        spec.base_config = resolve_config(inv);
        if (inv.vary == "n_vehicles")
            spec.variable = sweep::swept_variable::n_vehicles;
        else if (inv.vary == "symbol_budget")
            spec.variable = sweep::swept_variable::symbol_budget;
        else
            throw config_error("unknown swept variable '" + inv.vary + "'");
        spec.values = inv.values;
        spec.fixed_n = inv.n;
        spec.num_seeds = inv.num_seeds.value_or(100);
        spec.base_seed = inv.seed;
        spec.threads = inv.threads;
        const auto kind = sweep::parse_solver(inv.solver);
        if (!kind)
            throw config_error("unknown solver '" + inv.solver + "'");
        spec.solvers = {*kind};
        if (inv.metrics.empty()) {
            spec.outputs = {sweep::metric::total_energy, sweep::metric::worst_eps_log10};
        } else {
            for (const auto& name : inv.metrics) {
                bool found = false;
                for (int m = 0; m <= static_cast<int>(sweep::metric::energy_saved_percent); ++m) {
                    if (name == sweep::to_string(static_cast<sweep::metric>(m))) {
                        spec.outputs.push_back(static_cast<sweep::metric>(m));
                        found = true;
                    }
                }
                if (!found)
                    throw config_error("unknown metric '" + name + "'");
            }
        }
        return detail::write_sweep(spec, inv.output_path.value_or("."), out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    }
}

/// Randomized oracle-equivalence suites; offending instances are dumped
/// into the output directory.
inline int cmd_oracle_check(const invocation& inv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        oracle::options opt;
        opt.instances = inv.instances;
        opt.n_values = inv.n_values;
        opt.seed = inv.seed;
        opt.force_failure = inv.force_failure;
        opt.dump_dir = inv.output_path.value_or("oracle_dumps");
        if (opt.n_values.empty())
            throw config_error("oracle-check: empty n range");
        for (auto n : opt.n_values)
            if (n < 1 || n > 3)
                throw config_error("oracle-check: n must lie in [1, 3]");
        const auto res = oracle::run(opt);
        for (const auto& s : res.suites)
            out << (s.failed ? "FAIL " : "PASS ") << s.name << ": " << s.checked - s.failed << "/" << s.checked
                << " passed" << (s.gaps ? ", " + std::to_string(s.gaps) + " tolerated gaps" : std::string()) << '\n';
        for (const auto& d : res.dumps)
            out << "dumped " << d.string() << '\n';
        return res.passed() ? exit_ok : exit_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    }
}

} // namespace elid::cli

#endif
