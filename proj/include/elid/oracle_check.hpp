#ifndef ELID_ORACLE_CHECK_HPP
#define ELID_ORACLE_CHECK_HPP

// Randomized small-instance equivalence suites between the allocators and
// exhaustive enumeration.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "allocators.hpp"
#include "channel_model.hpp"
#include "config_io.hpp"
#include "rng.hpp"

namespace elid::oracle {

struct options {
    std::int64_t instances = 240;
    std::vector<std::int64_t> n_values{1, 2, 3};
    std::int64_t max_symbol_budget = 60;
    std::uint64_t seed = 0;
    bool force_failure = false; // test hook: corrupt the first comparison
    std::filesystem::path dump_dir; // empty: no dumps
};

struct suite_result {
    std::string name;
    std::int64_t checked = 0;
    std::int64_t failed = 0;
    std::int64_t gaps = 0; // tolerated local-search gaps (n = 3)
};

struct result {
    std::vector<suite_result> suites;
    std::vector<std::filesystem::path> dumps;

    bool passed() const {
        for (const auto& s : suites)
            if (s.failed)
                return false;
        return true;
    }
};

/// Best worst-case margin over all splits with Σm = M at a common power.
inline double brute_force_fixed_power(const channel::scenario& s, double p) {
    const std::size_t n = s.size();
    const std::int64_t M = s.config.symbol_budget;
    std::vector<std::int64_t> lo(n, 1), hi(n, M);
    double best = -std::numeric_limits<double>::infinity();
    alloc::detail::enumerate_blocklengths(lo, hi, M, [&](const std::vector<std::int64_t>& m) {
        std::int64_t used = 0;
        for (auto x : m)
            used += x;
        if (used != M)
            return;
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            worst = std::min(worst, fbl::margin(p * s.links[i].norm_gain, m[i], s.config.payload_bits).g);
        best = std::max(best, worst);
    });
    return best;
}

/// Random instance: gains log-uniform in [1e2, 1e5] per watt, D in [16, 160],
/// n <= M <= max_symbol_budget.
inline channel::scenario random_instance(random_stream& rng, std::int64_t n, std::int64_t max_symbol_budget) {
    system_config c;
    c.max_vehicles = std::max<std::int64_t>(n, c.max_vehicles);
    c.symbol_budget = n + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(max_symbol_budget - n + 1));
    c.payload_bits = 16 + static_cast<std::int64_t>(rng.uniform() * 145.0);
    c.energy_budget = 10.0;
    std::vector<double> gains;
    for (std::int64_t i = 0; i < n; ++i)
        gains.push_back(std::pow(10.0, 2.0 + 3.0 * rng.uniform()));
    return channel::scenario_from_gains(c, gains);
}

/// Writes a replayable instance description: config keys plus norm_gains.
inline std::filesystem::path dump_instance(const std::filesystem::path& dir, const std::string& tag,
                                           const channel::scenario& s, const std::string& note) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (tag + ".txt");
    std::ofstream out(path, std::ios::binary);
    const auto& c = s.config;
    out << "# " << note << '\n';
    out << "payload_bits=" << c.payload_bits << "\nsymbol_budget=" << c.symbol_budget
        << "\nenergy_budget=" << c.energy_budget << "\ntarget_eps=" << c.target_eps << "\nalpha=" << c.alpha
        << "\nmax_vehicles=" << c.max_vehicles << '\n';
    out << "# norm_gains=";
    for (std::size_t i = 0; i < s.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", s.links[i].norm_gain);
        out << buf;
    }
    out << '\n';
    return path;
}

inline result run(const options& opt) {
    suite_result greedy{"symbols_minmax_fixed_p vs enumeration"};
    suite_result sharing{"symbol_sharing vs brute_force_energy"};
    result res;
    auto rng = random_stream(combine_keys(opt.seed, hash_string("oracle-check")));
    bool corrupt = opt.force_failure;

    auto dump = [&](const std::string& tag, const channel::scenario& s, const std::string& note) {
        if (!opt.dump_dir.empty())
            res.dumps.push_back(dump_instance(opt.dump_dir, tag, s, note));
    };

    for (std::int64_t k = 0; k < opt.instances; ++k) {
        const auto n = opt.n_values[static_cast<std::size_t>(k) % opt.n_values.size()];
        const auto s = random_instance(rng, n, opt.max_symbol_budget);
        const std::string tag = "instance_" + std::to_string(k) + "_n" + std::to_string(n);

        const double p = s.config.common_power();
        double greedy_g = alloc::solve_symbols_minmax_fixed_p(s, p).worst.g;
        if (corrupt) {
            greedy_g -= 1.0;
            corrupt = false;
        }
        const double exact_g = brute_force_fixed_power(s, p);
        ++greedy.checked;
        if (greedy_g != exact_g) {
            ++greedy.failed;
            dump(tag + "_greedy", s, "greedy worst margin differs from enumeration");
        }

        const double g_target = alloc::target_margin(s.config);
        const double shared = alloc::symbol_sharing(s, g_target).total_energy;
        const double best = alloc::brute_force_energy(s, g_target).total_energy;
        const double rel = (shared - best) / best;
        ++sharing.checked;
        if (n <= 2 && rel > 1e-9) {
            ++sharing.failed;
            dump(tag + "_sharing", s, "symbol sharing energy above exhaustive minimum");
        } else if (rel > 1e-9) {
            ++sharing.gaps;
            if (rel > 0.02)
                ++sharing.failed;
            dump(tag + "_sharing_gap", s, "local-search gap " + std::to_string(100.0 * rel) + "%");
        }
    }
    res.suites = {greedy, sharing};
    return res;
}

} // namespace elid::oracle

#endif
