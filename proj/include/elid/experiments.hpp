#ifndef ELID_EXPERIMENTS_HPP
#define ELID_EXPERIMENTS_HPP

// Monte Carlo sweep harness: runs a solver over (swept value x seed) cells,
// emits one row per metric and writes schedule-independent CSV.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "allocators.hpp"
#include "channel_model.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace elid::sweep {

enum class swept_variable { n_vehicles, symbol_budget };

enum class solver_kind {
    joint_minmax,
    power_minmax_fixed_m,
    symbols_minmax_fixed_p,
    symbol_sharing,
    equal_allocation,
};

enum class metric {
    min_blocklength,
    max_blocklength,
    blocklength_spread, // (max m - min m) / (M / n)
    min_power,
    max_power,
    worst_margin,
    worst_eps_log10,
    total_energy,
    iterations,
    energy_saved_percent, // needs symbol_sharing and equal_allocation
};

inline const char* to_string(swept_variable v) {
    return v == swept_variable::n_vehicles ? "n_vehicles" : "symbol_budget";
}

inline const char* to_string(solver_kind s) {
    switch (s) {
    case solver_kind::joint_minmax: return "joint_minmax";
    case solver_kind::power_minmax_fixed_m: return "power_minmax_fixed_m";
    case solver_kind::symbols_minmax_fixed_p: return "symbols_minmax_fixed_p";
    case solver_kind::symbol_sharing: return "symbol_sharing";
    case solver_kind::equal_allocation: return "equal_allocation";
    }
    return "?";
}

inline std::optional<solver_kind> parse_solver(std::string_view name) {
    for (auto s : {solver_kind::joint_minmax, solver_kind::power_minmax_fixed_m,
                   solver_kind::symbols_minmax_fixed_p, solver_kind::symbol_sharing,
                   solver_kind::equal_allocation})
        if (name == to_string(s))
            return s;
    return std::nullopt;
}

inline const char* to_string(metric m) {
    switch (m) {
    case metric::min_blocklength: return "min_blocklength";
    case metric::max_blocklength: return "max_blocklength";
    case metric::blocklength_spread: return "blocklength_spread";
    case metric::min_power: return "min_power";
    case metric::max_power: return "max_power";
    case metric::worst_margin: return "worst_margin";
    case metric::worst_eps_log10: return "worst_eps_log10";
    case metric::total_energy: return "total_energy";
    case metric::iterations: return "iterations";
    case metric::energy_saved_percent: return "energy_saved_percent";
    }
    return "?";
}

inline const char* units(metric m) {
    switch (m) {
    case metric::min_blocklength:
    case metric::max_blocklength: return "symbols";
    case metric::min_power:
    case metric::max_power: return "W";
    case metric::worst_eps_log10: return "log10";
    case metric::total_energy: return "J";
    case metric::iterations: return "count";
    case metric::energy_saved_percent: return "%";
    case metric::blocklength_spread:
    case metric::worst_margin: return "1";
    }
    return "";
}

struct sweep_spec {
    std::string name;
    system_config base_config;
    swept_variable variable = swept_variable::n_vehicles;
    std::vector<std::int64_t> values;
    std::int64_t num_seeds = 100;
    std::vector<solver_kind> solvers;
    std::vector<metric> outputs;
    // Extra symbol budgets evaluated on the same scenario; empty means the
    // base config's budget only.
    std::vector<std::int64_t> symbol_budgets;
    // Vehicle count when the swept variable is the symbol budget.
    std::int64_t fixed_n = 5;
    std::uint64_t base_seed = 0;
    unsigned threads = 1;
};

/// One metric for one (swept value, seed). An empty value means the cell
/// was infeasible.
struct result_row {
    std::string sweep;
    std::int64_t swept_value = 0;
    std::int64_t seed = 0;
    std::string metric;
    std::optional<double> value;
    std::string units;

    bool operator==(const result_row&) const = default;
};

inline void validate(const sweep_spec& spec) {
    if (spec.values.empty())
        throw config_error("sweep '" + spec.name + "': no swept values");
    if (spec.num_seeds < 1)
        throw config_error("sweep '" + spec.name + "': num_seeds must be >= 1");
    if (spec.solvers.empty())
        throw config_error("sweep '" + spec.name + "': no solver");
    if (spec.outputs.empty())
        throw config_error("sweep '" + spec.name + "': no outputs");
    const bool saved = std::ranges::find(spec.outputs, metric::energy_saved_percent) != spec.outputs.end();
    if (saved && (std::ranges::find(spec.solvers, solver_kind::symbol_sharing) == spec.solvers.end() ||
                  std::ranges::find(spec.solvers, solver_kind::equal_allocation) == spec.solvers.end()))
        throw config_error("sweep '" + spec.name +
                           "': energy_saved_percent needs symbol_sharing and equal_allocation");
    validate(spec.base_config);
}

/// 100 (e_equal - e_shared) / e_equal.
inline double energy_saved_percent(double e_equal, double e_shared) {
    if (!(e_equal > 0.0))
        throw domain_error("energy_saved_percent: reference energy must be positive");
    return 100.0 * (e_equal - e_shared) / e_equal;
}

/// Scenario seed of one sweep cell. The swept value is deliberately not
/// part of the key: seed k draws the same vehicles at every swept value
/// (common random numbers), and with per-link substreams an n-vehicle
/// scenario is the (n-1)-vehicle one plus one more vehicle.
inline std::uint64_t cell_seed(std::uint64_t base_seed, std::string_view sweep_name, std::int64_t seed_index) {
    const std::uint64_t k = combine_keys(base_seed, hash_string(sweep_name));
    return combine_keys(k, static_cast<std::uint64_t>(seed_index));
}

inline alloc::solve_report run_solver(solver_kind kind, const channel::scenario& s) {
    const auto& cfg = s.config;
    switch (kind) {
    case solver_kind::joint_minmax: return alloc::solve_joint_minmax(s);
    case solver_kind::power_minmax_fixed_m:
        return alloc::solve_power_minmax_fixed_m(s, alloc::equal_split(cfg.symbol_budget, s.size()));
    case solver_kind::symbols_minmax_fixed_p: return alloc::solve_symbols_minmax_fixed_p(s, cfg.common_power());
    case solver_kind::symbol_sharing: return alloc::symbol_sharing(s, alloc::target_margin(cfg));
    case solver_kind::equal_allocation: return alloc::solve_equal_allocation(s, alloc::target_margin(cfg));
    }
    throw std::logic_error("unknown solver");
}

inline double metric_value(metric m, const alloc::solve_report& r, std::int64_t symbol_budget) {
    const auto& a = r.alloc;
    switch (m) {
    case metric::min_blocklength: return static_cast<double>(std::ranges::min(a.blocklengths));
    case metric::max_blocklength: return static_cast<double>(std::ranges::max(a.blocklengths));
    case metric::blocklength_spread: {
        const double share = static_cast<double>(symbol_budget) / static_cast<double>(a.blocklengths.size());
        return static_cast<double>(std::ranges::max(a.blocklengths) - std::ranges::min(a.blocklengths)) / share;
    }
    case metric::min_power: return std::ranges::min(a.powers);
    case metric::max_power: return std::ranges::max(a.powers);
    case metric::worst_margin: return r.worst.g;
    case metric::worst_eps_log10: return r.worst.eps_log10;
    case metric::total_energy: return r.total_energy;
    case metric::iterations: return static_cast<double>(r.iterations);
    case metric::energy_saved_percent: break;
    }
    throw std::logic_error("metric needs more than one report");
}

namespace detail {

inline std::vector<result_row> run_cell(const sweep_spec& spec, std::int64_t value, std::int64_t seed_index) {
    system_config cfg = spec.base_config;
    std::int64_t n = spec.fixed_n;
    if (spec.variable == swept_variable::n_vehicles)
        n = value;
    else
        cfg.symbol_budget = value;
    if (n > cfg.max_vehicles)
        cfg.max_vehicles = n;

    const auto base = channel::sample_scenario(cfg, n, cell_seed(spec.base_seed, spec.name, seed_index));
    const std::vector<std::int64_t> budgets =
        spec.symbol_budgets.empty() ? std::vector<std::int64_t>{cfg.symbol_budget} : spec.symbol_budgets;

    std::vector<result_row> rows;
    auto emit = [&](std::string name, std::optional<double> v, metric m) {
        rows.push_back({spec.name, value, seed_index, std::move(name), v, units(m)});
    };
    for (auto budget : budgets) {
        auto s = base;
        s.config.symbol_budget = budget;
        const std::string budget_suffix = spec.symbol_budgets.empty() ? "" : "@M=" + std::to_string(budget);

        std::map<solver_kind, std::optional<alloc::solve_report>> reports;
        for (auto kind : spec.solvers) {
            try {
                reports[kind] = run_solver(kind, s);
            } catch (const infeasible_error&) {
                reports[kind] = std::nullopt;
            }
        }
        for (auto m : spec.outputs) {
            if (m == metric::energy_saved_percent) {
                const auto& eq = reports[solver_kind::equal_allocation];
                const auto& sh = reports[solver_kind::symbol_sharing];
                std::optional<double> v;
                if (eq && sh)
                    v = energy_saved_percent(eq->total_energy, sh->total_energy);
                emit(std::string(to_string(m)) + budget_suffix, v, m);
                continue;
            }
            for (auto kind : spec.solvers) {
                std::string name = to_string(m);
                if (spec.solvers.size() > 1)
                    name += std::string("@") + to_string(kind);
                const auto& r = reports[kind];
                emit(name + budget_suffix, r ? std::optional(metric_value(m, *r, budget)) : std::nullopt, m);
            }
        }
    }
    return rows;
}

} // namespace detail

/// Runs every (value, seed) cell, possibly on several threads, and returns
/// rows sorted by (swept_value, seed, metric). Infeasible cells produce
/// rows without a value; they never abort the sweep.
inline std::vector<result_row> run_sweep(const sweep_spec& spec) {
    validate(spec);
    struct cell {
        std::int64_t value;
        std::int64_t seed;
    };
    std::vector<cell> cells;
    for (auto v : spec.values)
        for (std::int64_t k = 0; k < spec.num_seeds; ++k)
            cells.push_back({v, k});

    std::vector<std::vector<result_row>> out(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++)
            out[i] = detail::run_cell(spec, cells[i].value, cells[i].seed);
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(cells.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }

    std::vector<result_row> rows;
    for (auto& c : out)
        std::ranges::move(c, std::back_inserter(rows));
    std::ranges::stable_sort(rows, [](const result_row& a, const result_row& b) {
        return std::tie(a.swept_value, a.seed, a.metric) < std::tie(b.swept_value, b.seed, b.metric);
    });
    return rows;
}

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline constexpr const char* csv_header = "sweep,swept_value,seed,metric,value,units";

/// UTF-8, LF line endings, 12 significant digits; "infeasible" marks
/// cells without a value.
inline void write_csv(std::ostream& os, const std::vector<result_row>& rows) {
    os << csv_header << '\n';
    for (const auto& r : rows)
        os << r.sweep << ',' << r.swept_value << ',' << r.seed << ',' << r.metric << ','
           << (r.value ? format_value(*r.value) : std::string("infeasible")) << ',' << r.units << '\n';
}

struct summary_row {
    std::int64_t swept_value = 0;
    std::string metric;
    std::int64_t count = 0;      // feasible cells
    std::int64_t infeasible = 0;
    std::optional<double> mean;  // absent when count == 0
    double sd = 0.0;             // sample standard deviation
};

/// Mean, sample standard deviation and counts per (swept value, metric).
inline std::vector<summary_row> summarize(const std::vector<result_row>& rows) {
    std::map<std::pair<std::int64_t, std::string>, std::pair<std::vector<double>, std::int64_t>> groups;
    for (const auto& r : rows) {
        auto& g = groups[{r.swept_value, r.metric}];
        if (r.value)
            g.first.push_back(*r.value);
        else
            ++g.second;
    }
    std::vector<summary_row> out;
    for (const auto& [key, g] : groups) {
        summary_row s{key.first, key.second, static_cast<std::int64_t>(g.first.size()), g.second, std::nullopt, 0.0};
        if (!g.first.empty()) {
            double sum = 0.0;
            for (double v : g.first)
                sum += v;
            const double mean = sum / static_cast<double>(g.first.size());
            s.mean = mean;
            if (g.first.size() > 1) {
                double ss = 0.0;
                for (double v : g.first)
                    ss += (v - mean) * (v - mean);
                s.sd = std::sqrt(ss / static_cast<double>(g.first.size() - 1));
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<summary_row>& rows) {
    os << "swept_value,metric,count,infeasible,mean,sd\n";
    for (const auto& r : rows)
        os << r.swept_value << ',' << r.metric << ',' << r.count << ',' << r.infeasible << ','
           << (r.mean ? format_value(*r.mean) : std::string("absent")) << ',' << format_value(r.sd) << '\n';
}

// Figure presets. All start from the default system_config.

inline std::vector<std::int64_t> vehicle_counts() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

/// Min/max blocklengths under a common power, M = 200.
inline sweep_spec preset_fig4() {
    sweep_spec s;
    s.name = "fig4";
    s.base_config.symbol_budget = 200;
    s.values = vehicle_counts();
    s.solvers = {solver_kind::symbols_minmax_fixed_p};
    s.outputs = {metric::min_blocklength, metric::max_blocklength, metric::blocklength_spread};
    return s;
}

/// Min/max powers under the equal symbol split, E_tot = 10 J.
inline sweep_spec preset_fig5() {
    sweep_spec s;
    s.name = "fig5";
    s.base_config.energy_budget = 10.0;
    s.values = vehicle_counts();
    s.solvers = {solver_kind::power_minmax_fixed_m};
    s.outputs = {metric::min_power, metric::max_power};
    return s;
}

/// Worst-case error probability under both restricted allocations.
inline sweep_spec preset_fig6() {
    sweep_spec s;
    s.name = "fig6";
    s.values = vehicle_counts();
    s.solvers = {solver_kind::symbols_minmax_fixed_p, solver_kind::power_minmax_fixed_m};
    s.outputs = {metric::worst_eps_log10};
    return s;
}

/// Minimum total energy from symbol sharing, alpha = 1, D = 160 bits,
/// at M = 200 and M = 1000.
inline sweep_spec preset_fig7() {
    sweep_spec s;
    s.name = "fig7";
    s.base_config.alpha = 1;
    s.base_config.payload_bits = 160;
    s.values = vehicle_counts();
    s.solvers = {solver_kind::symbol_sharing};
    s.outputs = {metric::total_energy};
    s.symbol_budgets = {200, 1000};
    return s;
}

/// Energy saved by symbol sharing over the equal split, n = 5.
inline sweep_spec preset_fig8() {
    sweep_spec s;
    s.name = "fig8";
    s.base_config.alpha = 1;
    s.base_config.payload_bits = 160;
    s.variable = swept_variable::symbol_budget;
    s.values = {200, 400, 600, 800, 1000};
    s.fixed_n = 5;
    s.solvers = {solver_kind::symbol_sharing, solver_kind::equal_allocation};
    s.outputs = {metric::energy_saved_percent};
    return s;
}

inline std::optional<sweep_spec> preset(int figure) {
    switch (figure) {
    case 4: return preset_fig4();
    case 5: return preset_fig5();
    case 6: return preset_fig6();
    case 7: return preset_fig7();
    case 8: return preset_fig8();
    default: return std::nullopt;
    }
}

} // namespace elid::sweep

#endif
