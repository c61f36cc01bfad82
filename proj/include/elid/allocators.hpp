#ifndef ELID_ALLOCATORS_HPP
#define ELID_ALLOCATORS_HPP

// Downlink resource allocation for one ELiD cell:
//
//  * max-min reliability (minimize the worst decoder error probability)
//    over powers, over blocklengths, or jointly, subject to the symbol
//    budget M and the energy budget E_tot;
//  * total-energy minimization at a target error probability via symbol
//    sharing;
//  * exhaustive oracles for small instances.
//
// All solvers work with the Q-argument g (the reliability margin) rather
// than with the error probability itself, which underflows for the margins
// of interest.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "channel_model.hpp"
#include "errors.hpp"
#include "fbl_core.hpp"

namespace elid::alloc {

using fbl::reliability_margin;
using channel::scenario;

/// Per-vehicle powers (W) and blocklengths (channel uses).
struct allocation {
    std::vector<double> powers;
    std::vector<std::int64_t> blocklengths;

    std::int64_t symbols_used() const {
        return std::accumulate(blocklengths.begin(), blocklengths.end(), std::int64_t{0});
    }

    double energy() const {
        double e = 0.0;
        for (std::size_t i = 0; i < powers.size(); ++i)
            e += powers[i] * static_cast<double>(blocklengths[i]);
        return e;
    }

    bool operator==(const allocation&) const = default;
};

struct trace_point {
    std::int64_t iteration = 0;
    double value = 0.0; // total energy or worst margin, depending on the solver
};

struct solve_report {
    allocation alloc;
    std::vector<reliability_margin> margins;
    reliability_margin worst;
    double total_energy = 0.0;
    std::int64_t iterations = 0;
    std::vector<trace_point> trace;
    bool converged = false;
    std::string solver_name;
    std::vector<bool> clamped; // vehicles whose power was clamped at zero
};

struct energy_result {
    std::vector<double> powers;
    double total_energy = 0.0;
};

/// g_target = Q^{-1}(target_eps); about 5.998 for 1e-9.
inline double target_margin(const system_config& cfg) {
    return fbl::q_inverse(cfg.target_eps);
}

namespace detail {

inline void check_allocation(const scenario& s, const allocation& a) {
    if (a.powers.size() != s.size() || a.blocklengths.size() != s.size())
        throw std::logic_error("allocation size does not match scenario");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(a.powers[i] >= 0.0))
            throw std::logic_error("allocation: negative power");
        if (a.blocklengths[i] < 1)
            throw std::logic_error("allocation: blocklength below 1");
    }
    if (a.symbols_used() > s.config.symbol_budget)
        throw std::logic_error("allocation: symbol budget exceeded");
}

inline void require_vehicles(const scenario& s) {
    if (s.links.empty())
        throw domain_error("scenario has no vehicles");
    if (s.config.symbol_budget < static_cast<std::int64_t>(s.size()))
        throw infeasible_error(binding_bound::symbol_budget,
                               "symbol budget " + std::to_string(s.config.symbol_budget) +
                                   " is smaller than the number of vehicles " + std::to_string(s.size()));
}

// Lowest index attaining the extremum; gives exchanges a total order.
template <class Cmp>
std::size_t arg_extreme(std::span<const double> v, Cmp better) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (better(v[i], v[best]))
            best = i;
    return best;
}

// Visits every integer vector with lo[i] <= m[i] <= hi[i] and sum <= total.
inline void enumerate_blocklengths(std::span<const std::int64_t> lo, std::span<const std::int64_t> hi,
                                   std::int64_t total,
                                   const std::function<void(const std::vector<std::int64_t>&)>& visit) {
    const std::size_t n = lo.size();
    std::vector<std::int64_t> m(n);
    std::int64_t min_rest = 0;
    for (auto x : lo)
        min_rest += x;
    std::function<void(std::size_t, std::int64_t, std::int64_t)> rec =
        [&](std::size_t i, std::int64_t used, std::int64_t rest_lb) {
            if (i == n) {
                visit(m);
                return;
            }
            const std::int64_t rest_after = rest_lb - lo[i];
            const std::int64_t top = std::min(hi[i], total - used - rest_after);
            for (std::int64_t v = lo[i]; v <= top; ++v) {
                m[i] = v;
                rec(i + 1, used + v, rest_after);
            }
        };
    rec(0, 0, min_rest);
}

} // namespace detail

/// Margins, worst margin and energy for a given allocation (unit dispersion).
inline solve_report make_report(const scenario& s, allocation a, std::string solver_name) {
    detail::check_allocation(s, a);
    solve_report r;
    r.solver_name = std::move(solver_name);
    r.margins.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        r.margins.push_back(fbl::margin(a.powers[i] * s.links[i].norm_gain, a.blocklengths[i],
                                        s.config.payload_bits));
    r.worst = *std::min_element(r.margins.begin(), r.margins.end(),
                                [](const auto& x, const auto& y) { return x.g < y.g; });
    r.total_energy = a.energy();
    r.clamped.assign(s.size(), false);
    for (std::size_t i = 0; i < s.size(); ++i)
        r.clamped[i] = a.powers[i] == 0.0;
    r.alloc = std::move(a);
    return r;
}

/// ⌊M/n⌋ each, remainder to the lowest vehicle ids.
inline std::vector<std::int64_t> equal_split(std::int64_t symbol_budget, std::size_t n) {
    const auto nn = static_cast<std::int64_t>(n);
    std::vector<std::int64_t> m(n, symbol_budget / nn);
    for (std::int64_t i = 0; i < symbol_budget % nn; ++i)
        ++m[static_cast<std::size_t>(i)];
    return m;
}

/// Closed-form minimum-energy powers for fixed blocklengths: every vehicle
/// meets g_target with equality (or is clamped at zero power).
inline energy_result min_energy_fixed_m(const scenario& s, std::span<const std::int64_t> m,
                                        double g_target) {
    if (m.size() != s.size())
        throw domain_error("min_energy_fixed_m: blocklength vector size mismatch");
    energy_result r;
    r.powers.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] < 1)
            throw domain_error("min_energy_fixed_m: blocklengths must be >= 1");
        const double p = fbl::min_power_for_target(s.links[i].norm_gain, m[i], s.config.payload_bits, g_target);
        r.powers.push_back(p);
        r.total_energy += p * static_cast<double>(m[i]);
    }
    return r;
}

/// Blocklength in [1, max_m] minimizing the single-link energy
/// m * p_min(m) (independent of the link gain). Lowest m on ties.
inline std::int64_t energy_optimal_blocklength(std::int64_t payload_bits, double g_target, std::int64_t max_m) {
    std::int64_t best = 1;
    double best_e = std::numeric_limits<double>::infinity();
    for (std::int64_t m = 1; m <= max_m; ++m) {
        const double e = static_cast<double>(m) * fbl::min_power_for_target(1.0, m, payload_bits, g_target);
        if (e < best_e) {
            best_e = e;
            best = m;
        }
    }
    return best;
}

/// Equal-split baseline with closed-form powers.
inline std::pair<allocation, double> equal_allocation_energy(const scenario& s, double g_target) {
    detail::require_vehicles(s);
    auto m = equal_split(s.config.symbol_budget, s.size());
    auto e = min_energy_fixed_m(s, m, g_target);
    return {allocation{std::move(e.powers), std::move(m)}, e.total_energy};
}

inline solve_report solve_equal_allocation(const scenario& s, double g_target) {
    auto [a, e] = equal_allocation_energy(s, g_target);
    auto r = make_report(s, std::move(a), "equal_allocation");
    r.iterations = 1;
    r.trace.push_back({1, r.total_energy});
    r.converged = true;
    return r;
}

/// Symbol sharing for total-energy minimization at margin g_target.
///
/// Starts from the equal split (each share capped at the energy-optimal
/// single-link blocklength, so Σm <= M), then repeatedly computes the
/// closed-form powers and moves alpha symbols from the minimum-power vehicle
/// to the maximum-power vehicle while the total energy strictly decreases.
/// The last, non-improving move is undone, so the returned allocation
/// attains the reported energy. Trace values are energies.
inline solve_report symbol_sharing(const scenario& s, double g_target) {
    detail::require_vehicles(s);
    const auto& cfg = s.config;
    if (cfg.alpha < 1)
        throw domain_error("symbol_sharing: alpha must be >= 1");
    const std::size_t n = s.size();

    auto m = equal_split(cfg.symbol_budget, n);
    const std::int64_t cap = energy_optimal_blocklength(cfg.payload_bits, g_target, cfg.symbol_budget);
    for (auto& mi : m)
        mi = std::min(mi, cap);

    std::vector<std::int64_t> best_m = m;
    energy_result best;
    std::vector<trace_point> trace;
    std::int64_t iter = 0;
    bool converged = false;
    while (true) {
        ++iter;
        auto cur = min_energy_fixed_m(s, m, g_target);
        if (!trace.empty() && !(cur.total_energy < best.total_energy * (1.0 - 1e-12))) {
            converged = true; // revert: keep best_m / best
            break;
        }
        best = std::move(cur);
        best_m = m;
        trace.push_back({iter, best.total_energy});

        const auto hi = detail::arg_extreme(std::span<const double>(best.powers), std::greater<>{});
        const auto lo = detail::arg_extreme(std::span<const double>(best.powers), std::less<>{});
        if (hi == lo || best.powers[hi] == best.powers[lo]) {
            converged = true;
            break;
        }
        if (m[lo] - cfg.alpha < 1) {
            converged = true; // donor would drop below one symbol
            break;
        }
        m[hi] += cfg.alpha;
        m[lo] -= cfg.alpha;
    }

    auto r = make_report(s, allocation{std::move(best.powers), std::move(best_m)}, "symbol_sharing");
    r.iterations = iter;
    r.trace = std::move(trace);
    r.converged = converged;
    return r;
}

/// Max-min margin over powers for fixed blocklengths under Σ p_i m_i <= E_tot.
///
/// The energy needed to give every vehicle margin g, E(g) = Σ m_i p_min,i(g),
/// is nondecreasing in g, so the optimal common margin is found by bisection
/// bracketed from the zero-power point g = -max_i ln2 D/sqrt(m_i) upward.
/// Trace values are the bisection midpoints.
inline solve_report solve_power_minmax_fixed_m(const scenario& s, std::span<const std::int64_t> m) {
    detail::require_vehicles(s);
    const auto& cfg = s.config;
    if (m.size() != s.size())
        throw domain_error("solve_power_minmax_fixed_m: blocklength vector size mismatch");
    if (!(cfg.energy_budget > 0.0))
        throw domain_error("solve_power_minmax_fixed_m: energy budget must be positive");
    if (std::accumulate(m.begin(), m.end(), std::int64_t{0}) > cfg.symbol_budget)
        throw domain_error("solve_power_minmax_fixed_m: blocklengths exceed the symbol budget");

    const double budget = cfg.energy_budget;
    auto energy_at = [&](double g) { return min_energy_fixed_m(s, m, g).total_energy; };

    double g_lo = std::numeric_limits<double>::infinity();
    for (auto mi : m)
        g_lo = std::min(g_lo, -fbl::ln2 * static_cast<double>(cfg.payload_bits) / std::sqrt(static_cast<double>(mi)));
    // E(g_lo) == 0 <= budget. Expand upward until the budget is exceeded.
    double step = 1.0;
    double g_hi = g_lo + step;
    while (energy_at(g_hi) <= budget) {
        g_lo = g_hi;
        step *= 2.0;
        g_hi = g_lo + step;
    }

    std::vector<trace_point> trace;
    std::int64_t iter = 0;
    double e_lo = energy_at(g_lo);
    while (g_hi - g_lo > 1e-10 && (budget - e_lo) > 1e-12 * budget) {
        const double mid = 0.5 * (g_lo + g_hi);
        if (mid <= g_lo || mid >= g_hi)
            break;
        ++iter;
        const double e = energy_at(mid);
        if (e <= budget) {
            g_lo = mid;
            e_lo = e;
        } else {
            g_hi = mid;
        }
        trace.push_back({iter, mid});
    }

    auto powers = min_energy_fixed_m(s, m, g_lo).powers;
    auto r = make_report(s, allocation{std::move(powers), {m.begin(), m.end()}}, "power_minmax_fixed_m");
    r.iterations = iter;
    r.trace = std::move(trace);
    r.converged = true;
    if (r.total_energy > budget * (1.0 + 1e-12))
        throw std::logic_error("power min-max: energy budget exceeded");
    return r;
}

/// Max-min margin over integer blocklengths at a common power: grant
/// symbols one at a time to the current worst-margin vehicle (lowest id on
/// ties) until all M are used. Exact because each margin increases in its
/// own blocklength. Trace values are worst margins after each grant.
inline solve_report solve_symbols_minmax_fixed_p(const scenario& s, double p_common) {
    detail::require_vehicles(s);
    if (!(p_common > 0.0) || !std::isfinite(p_common))
        throw domain_error("solve_symbols_minmax_fixed_p: power must be positive");
    const auto& cfg = s.config;
    const std::size_t n = s.size();

    std::vector<std::int64_t> m(n, 1);
    std::vector<double> g(n);
    auto margin_of = [&](std::size_t i) {
        return fbl::margin(p_common * s.links[i].norm_gain, m[i], cfg.payload_bits).g;
    };
    for (std::size_t i = 0; i < n; ++i)
        g[i] = margin_of(i);

    std::vector<trace_point> trace;
    std::int64_t iter = 0;
    for (std::int64_t used = static_cast<std::int64_t>(n); used < cfg.symbol_budget; ++used) {
        const auto w = detail::arg_extreme(std::span<const double>(g), std::less<>{});
        ++m[w];
        g[w] = margin_of(w);
        ++iter;
        trace.push_back({iter, *std::min_element(g.begin(), g.end())});
    }

    auto r = make_report(s, allocation{std::vector<double>(n, p_common), std::move(m)}, "symbols_minmax_fixed_p");
    r.iterations = iter;
    r.trace = std::move(trace);
    r.converged = true;
    return r;
}

/// Per-vehicle blocklength bounds [lb, ub] for the joint max-min problem.
struct blocklength_bounds {
    std::vector<std::int64_t> lower;
    std::vector<std::int64_t> upper;
};

/// lb_i: smallest m with |h_i|^2 E_tot / sigma_i^2 > m (2^{D/m} - 1);
/// ub_i: M minus the other vehicles' lower bounds.
inline blocklength_bounds joint_bounds(const scenario& s) {
    detail::require_vehicles(s);
    const auto& cfg = s.config;
    blocklength_bounds b;
    for (const auto& l : s.links) {
        auto lb = fbl::min_blocklength(l.norm_gain * cfg.energy_budget, cfg.payload_bits, cfg.symbol_budget);
        if (!lb)
            throw infeasible_error(binding_bound::lower_blocklength,
                                   "vehicle " + std::to_string(l.vehicle_id) +
                                       ": no blocklength in [1, M] satisfies the energy feasibility bound");
        b.lower.push_back(*lb);
    }
    for (std::size_t i = 0; i < s.size(); ++i)
        b.upper.push_back(fbl::upper_blocklength(b.lower, i, cfg.symbol_budget));
    return b;
}

/// Joint max-min over powers and blocklengths.
///
/// Inner problem: solve_power_minmax_fixed_m. Outer problem: steepest-ascent
/// local search over the integer blocklength vector inside the bounds, with
/// moves "transfer alpha symbols i -> j", "add alpha to i" and "remove alpha
/// from i" (keeping Σm <= M), started from the equal split projected into
/// the bounds. Returns a local optimum of that neighborhood. Trace values
/// are worst margins.
inline solve_report solve_joint_minmax(const scenario& s) {
    const auto b = joint_bounds(s);
    const auto& cfg = s.config;
    const std::size_t n = s.size();
    const std::int64_t a = cfg.alpha;

    auto m = equal_split(cfg.symbol_budget, n);
    for (std::size_t i = 0; i < n; ++i)
        m[i] = std::clamp(m[i], b.lower[i], b.upper[i]);
    auto total = [&] { return std::accumulate(m.begin(), m.end(), std::int64_t{0}); };
    while (total() > cfg.symbol_budget) {
        std::size_t k = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (m[i] - b.lower[i] > m[k] - b.lower[k])
                k = i;
        --m[k];
    }

    auto worst_g = [&](const std::vector<std::int64_t>& mv) { return solve_power_minmax_fixed_m(s, mv).worst.g; };
    auto in_bounds = [&](const std::vector<std::int64_t>& mv) {
        for (std::size_t i = 0; i < n; ++i)
            if (mv[i] < b.lower[i] || mv[i] > b.upper[i])
                return false;
        return std::accumulate(mv.begin(), mv.end(), std::int64_t{0}) <= cfg.symbol_budget;
    };

    double current = worst_g(m);
    std::vector<trace_point> trace{{1, current}};
    std::int64_t iter = 1;
    bool improved = true;
    while (improved) {
        improved = false;
        std::vector<std::int64_t> best_m;
        double best = current;
        auto consider = [&](std::vector<std::int64_t> cand) {
            if (!in_bounds(cand))
                return;
            const double v = worst_g(cand);
            if (v > best + 1e-12) {
                best = v;
                best_m = std::move(cand);
            }
        };
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j)
                    continue;
                auto c = m;
                c[i] -= a;
                c[j] += a;
                consider(std::move(c));
            }
            auto up = m;
            up[i] += a;
            consider(std::move(up));
            auto down = m;
            down[i] -= a;
            consider(std::move(down));
        }
        if (!best_m.empty()) {
            m = std::move(best_m);
            current = best;
            improved = true;
            ++iter;
            trace.push_back({iter, current});
        }
    }

    auto r = solve_power_minmax_fixed_m(s, m);
    r.solver_name = "joint_minmax";
    r.iterations = iter;
    r.trace = std::move(trace);
    r.converged = true;
    return r;
}

namespace detail {
inline void guard_brute_force(const scenario& s, const char* name) {
    const auto n = s.size();
    const auto M = s.config.symbol_budget;
    if (n > 3 || (n == 3 && M > 100) || M > 1000)
        throw domain_error(std::string(name) + ": instance too large (requires n <= 2 and M <= 1000, or n = 3 and M <= 100)");
}
} // namespace detail

/// Exhaustive max-min over all blocklength vectors within the joint bounds
/// (Σm <= M), with exact inner power bisection. Lexicographically first
/// optimum on ties.
inline solve_report brute_force_minmax(const scenario& s) {
    detail::guard_brute_force(s, "brute_force_minmax");
    const auto b = joint_bounds(s);
    std::vector<std::int64_t> best_m;
    double best = -std::numeric_limits<double>::infinity();
    std::int64_t visited = 0;
    detail::enumerate_blocklengths(b.lower, b.upper, s.config.symbol_budget, [&](const auto& m) {
        ++visited;
        const double v = solve_power_minmax_fixed_m(s, m).worst.g;
        if (v > best) {
            best = v;
            best_m = m;
        }
    });
    auto r = solve_power_minmax_fixed_m(s, best_m);
    r.solver_name = "brute_force_minmax";
    r.iterations = visited;
    r.trace.clear();
    r.converged = true;
    return r;
}

/// Exhaustive total-energy minimum at margin g_target over all blocklength
/// vectors with m_i >= 1 and Σm <= M, closed-form powers.
inline solve_report brute_force_energy(const scenario& s, double g_target) {
    detail::guard_brute_force(s, "brute_force_energy");
    detail::require_vehicles(s);
    const std::size_t n = s.size();
    const std::int64_t M = s.config.symbol_budget;
    std::vector<std::int64_t> lo(n, 1), hi(n, M - static_cast<std::int64_t>(n) + 1);
    std::vector<std::int64_t> best_m;
    double best = std::numeric_limits<double>::infinity();
    std::int64_t visited = 0;
    detail::enumerate_blocklengths(lo, hi, M, [&](const auto& m) {
        ++visited;
        const double e = min_energy_fixed_m(s, m, g_target).total_energy;
        if (e < best) {
            best = e;
            best_m = m;
        }
    });
    auto e = min_energy_fixed_m(s, best_m, g_target);
    auto r = make_report(s, allocation{std::move(e.powers), std::move(best_m)}, "brute_force_energy");
    r.iterations = visited;
    r.converged = true;
    return r;
}

} // namespace elid::alloc

#endif
