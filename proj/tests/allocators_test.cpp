#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "elid/allocators.hpp"
#include "elid/oracle_check.hpp"

using namespace elid;
using namespace elid::alloc;
using channel::scenario_from_gains;

namespace {

constexpr double g_1e9 = 5.99780701500769; // Q^{-1}(1e-9), mpmath

system_config config_with(std::int64_t d, std::int64_t m, double e_tot = 10.0, std::int64_t alpha = 1) {
    system_config c;
    c.payload_bits = d;
    c.symbol_budget = m;
    c.energy_budget = e_tot;
    c.alpha = alpha;
    return c;
}

// Independent closed form: smallest power meeting margin g.
double power_for(double gain, std::int64_t m, std::int64_t d, double g) {
    const double md = static_cast<double>(m);
    return std::max(0.0, (std::exp(std::log(2.0) * static_cast<double>(d) / md + g / std::sqrt(md)) - 1.0) / gain);
}

double margin_of(double p, double gain, std::int64_t m, std::int64_t d) {
    const double md = static_cast<double>(m);
    return std::sqrt(md) * std::log(1.0 + p * gain) - std::log(2.0) * static_cast<double>(d) / std::sqrt(md);
}

std::vector<double> random_gains(std::mt19937_64& gen, std::size_t n, double lo_exp = 2.0, double hi_exp = 5.0) {
    std::uniform_real_distribution<double> e(lo_exp, hi_exp);
    std::vector<double> g;
    for (std::size_t i = 0; i < n; ++i)
        g.push_back(std::pow(10.0, e(gen)));
    return g;
}

void expect_feasible(const scenario& s, const solve_report& r) {
    ASSERT_EQ(r.alloc.powers.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_GE(r.alloc.powers[i], 0.0);
        EXPECT_GE(r.alloc.blocklengths[i], 1);
    }
    EXPECT_LE(r.alloc.symbols_used(), s.config.symbol_budget);
    EXPECT_DOUBLE_EQ(r.total_energy, r.alloc.energy());
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& m : r.margins)
        worst = std::min(worst, m.g);
    EXPECT_EQ(r.worst.g, worst);
}

} // namespace

TEST(MinEnergyFixedM, SingleVehicleWorkedValue) {
    const std::vector<double> gains{1.0};
    const auto s = scenario_from_gains(config_with(160, 200), gains);
    const std::vector<std::int64_t> m{100};
    const auto r = min_energy_fixed_m(s, m, g_1e9);
    EXPECT_NEAR(r.powers[0], 4.52242011255973, 1e-10);
    EXPECT_NEAR(r.total_energy, 452.242011255973, 1e-8);
    EXPECT_NEAR(fbl::margin(r.powers[0], 100, 160).g, g_1e9, 1e-9);
}

TEST(MinEnergyFixedM, ZeroTargetAtRateOneGivesInverseGain) {
    const std::vector<double> gains{2.0, 50.0, 0.3};
    const auto s = scenario_from_gains(config_with(160, 1000), gains);
    const std::vector<std::int64_t> m{160, 160, 160};
    const auto r = min_energy_fixed_m(s, m, 0.0);
    for (std::size_t i = 0; i < gains.size(); ++i)
        EXPECT_NEAR(r.powers[i], 1.0 / gains[i], 1e-14);
}

TEST(MinEnergyFixedM, IdenticalLinksGetEqualPowers) {
    const std::vector<double> gains{700.0, 700.0};
    const auto s = scenario_from_gains(config_with(160, 200), gains);
    const std::vector<std::int64_t> m{100, 100};
    const auto r = min_energy_fixed_m(s, m, g_1e9);
    EXPECT_EQ(r.powers[0], r.powers[1]);
}

TEST(EqualAllocation, SplitRule) {
    EXPECT_EQ(equal_split(200, 4), (std::vector<std::int64_t>{50, 50, 50, 50}));
    EXPECT_EQ(equal_split(200, 3), (std::vector<std::int64_t>{67, 67, 66}));
    EXPECT_EQ(equal_split(7, 1), (std::vector<std::int64_t>{7}));
}

TEST(EqualAllocation, IdenticalLinksMatchSymbolSharing) {
    const std::vector<double> gains(4, 1234.0);
    const auto s = scenario_from_gains(config_with(160, 200), gains);
    const auto [a, e] = equal_allocation_energy(s, g_1e9);
    const auto shared = symbol_sharing(s, g_1e9);
    EXPECT_NEAR(shared.total_energy, e, 1e-9 * e);
    EXPECT_EQ(shared.alloc.blocklengths, a.blocklengths);
}

TEST(SymbolSharing, SingleVehicleUsesWholeBudget) {
    const std::vector<double> gains{800.0};
    const auto s = scenario_from_gains(config_with(160, 200), gains);
    const auto r = symbol_sharing(s, g_1e9);
    EXPECT_EQ(r.alloc.blocklengths, (std::vector<std::int64_t>{200}));
    EXPECT_EQ(r.iterations, 1);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.total_energy, 200.0 * power_for(800.0, 200, 160, g_1e9), 1e-12);
}

TEST(SymbolSharing, SingleVehicleStopsAtEnergyOptimalBlocklength) {
    // Beyond ~365 symbols the single-link energy m * p_min(m) grows again.
    const std::vector<double> gains{800.0};
    const auto big = symbol_sharing(scenario_from_gains(config_with(160, 1000), gains), g_1e9);
    const auto small = symbol_sharing(scenario_from_gains(config_with(160, 200), gains), g_1e9);
    double best = std::numeric_limits<double>::infinity();
    std::int64_t arg = 0;
    for (std::int64_t m = 1; m <= 1000; ++m) {
        const double e = static_cast<double>(m) * power_for(800.0, m, 160, g_1e9);
        if (e < best) {
            best = e;
            arg = m;
        }
    }
    EXPECT_EQ(big.alloc.blocklengths[0], arg);
    EXPECT_NEAR(big.total_energy, best, 1e-12 * best);
    EXPECT_GT(small.total_energy, big.total_energy);
}

TEST(SymbolSharing, IdenticalPairKeepsEqualSplit) {
    const std::vector<double> gains{500.0, 500.0};
    const auto s = scenario_from_gains(config_with(160, 200), gains);
    const auto r = symbol_sharing(s, g_1e9);
    EXPECT_EQ(r.alloc.blocklengths, (std::vector<std::int64_t>{100, 100}));
    EXPECT_TRUE(r.converged);
}

TEST(SymbolSharing, TenToOnePairMatchesSplitScan) {
    const std::vector<double> gains{1000.0, 100.0};
    const auto s = scenario_from_gains(config_with(160, 200), gains);
    const auto r = symbol_sharing(s, g_1e9);

    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t m1 = 1; m1 <= 199; ++m1) {
        const std::int64_t m2 = 200 - m1;
        best = std::min(best, static_cast<double>(m1) * power_for(1000.0, m1, 160, g_1e9) +
                                  static_cast<double>(m2) * power_for(100.0, m2, 160, g_1e9));
    }
    EXPECT_NEAR(r.total_energy, best, 1e-9 * best);
    EXPECT_GT(r.alloc.blocklengths[1], r.alloc.blocklengths[0]);
}

TEST(SymbolSharing, TraceDominanceAndIterationBound) {
    std::mt19937_64 gen(21);
    system_config cfg;
    for (int t = 0; t < 100; ++t) {
        const auto n = static_cast<std::int64_t>(1 + t % 10);
        cfg.symbol_budget = 200 + 100 * (t % 9);
        const auto s = channel::sample_scenario(cfg, n, gen());
        const auto r = symbol_sharing(s, g_1e9);
        expect_feasible(s, r);
        for (std::size_t k = 1; k < r.trace.size(); ++k)
            EXPECT_LT(r.trace[k].value, r.trace[k - 1].value);
        EXPECT_EQ(r.trace.back().value, r.total_energy);
        EXPECT_LE(r.iterations, cfg.symbol_budget * n / cfg.alpha);
        EXPECT_LE(r.total_energy, equal_allocation_energy(s, g_1e9).second);
        // Every vehicle meets the target margin.
        for (const auto& m : r.margins)
            EXPECT_GE(m.g, g_1e9 - 1e-9);
    }
}

TEST(SymbolSharing, ScalingGainsScalesPowersOnly) {
    std::mt19937_64 gen(4);
    for (int t = 0; t < 30; ++t) {
        const auto gains = random_gains(gen, 1 + t % 5);
        std::vector<double> scaled;
        const double c = 37.5;
        for (double g : gains)
            scaled.push_back(g * c);
        auto cfg = config_with(160, 300);
        const auto a = symbol_sharing(scenario_from_gains(cfg, gains), g_1e9);
        cfg.energy_budget /= c;
        const auto b = symbol_sharing(scenario_from_gains(cfg, scaled), g_1e9);
        EXPECT_EQ(a.alloc.blocklengths, b.alloc.blocklengths);
        for (std::size_t i = 0; i < gains.size(); ++i)
            EXPECT_NEAR(b.alloc.powers[i], a.alloc.powers[i] / c, 1e-12 * a.alloc.powers[i]);
    }
}

TEST(SymbolSharing, LargerAlphaStillTerminates) {
    std::mt19937_64 gen(8);
    const auto s = scenario_from_gains(config_with(160, 400, 10.0, 7), random_gains(gen, 4));
    const auto r = symbol_sharing(s, g_1e9);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 400 * 4 / 7);
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_EQ((r.alloc.blocklengths[i] - 100) % 7, 0);
}

TEST(SymbolSharing, FewerSymbolsThanVehicles) {
    const std::vector<double> gains{1.0, 2.0, 3.0};
    try {
        symbol_sharing(scenario_from_gains(config_with(160, 2), gains), g_1e9);
        FAIL();
    } catch (const infeasible_error& e) {
        EXPECT_EQ(e.bound(), binding_bound::symbol_budget);
    }
}

TEST(PowerMinmax, SingleVehicleExhaustsBudget) {
    const std::vector<double> gains{900.0};
    const auto s = scenario_from_gains(config_with(160, 200, 10.0), gains);
    const std::vector<std::int64_t> m{200};
    const auto r = solve_power_minmax_fixed_m(s, m);
    EXPECT_NEAR(r.alloc.powers[0], 10.0 / 200.0, 1e-9 * 0.05);
    EXPECT_NEAR(r.worst.g, margin_of(0.05, 900.0, 200, 160), 1e-8);
}

TEST(PowerMinmax, SymmetricPair) {
    const std::vector<double> gains{300.0, 300.0};
    const auto s = scenario_from_gains(config_with(160, 200, 2.0), gains);
    const std::vector<std::int64_t> m{100, 100};
    const auto r = solve_power_minmax_fixed_m(s, m);
    EXPECT_NEAR(r.alloc.powers[0], r.alloc.powers[1], 1e-12);
    EXPECT_NEAR(r.margins[0].g, r.margins[1].g, 1e-9);
}

TEST(PowerMinmax, EqualizesAndExhaustsBudget) {
    std::mt19937_64 gen(31);
    std::uniform_int_distribution<std::int64_t> n_dist(1, 6);
    std::uniform_real_distribution<double> e_dist(0.5, 20.0);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
        const auto n = static_cast<std::size_t>(n_dist(gen));
        const auto s = scenario_from_gains(config_with(160, 300, e_dist(gen)), random_gains(gen, n));
        const auto m = equal_split(300, n);
        const auto r = solve_power_minmax_fixed_m(s, m);
        expect_feasible(s, r);
        if (std::ranges::any_of(r.clamped, [](bool c) { return c; }))
            continue;
        ++checked;
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& mg : r.margins)
            hi = std::max(hi, mg.g);
        EXPECT_LE(hi - r.worst.g, 1e-8);
        EXPECT_LE(std::abs(r.total_energy - s.config.energy_budget), 1e-9 * s.config.energy_budget);
    }
    EXPECT_GT(checked, 150);
}

TEST(PowerMinmax, PairMatchesGridSearch) {
    std::mt19937_64 gen(77);
    for (int t = 0; t < 20; ++t) {
        const auto gains = random_gains(gen, 2);
        const std::vector<std::int64_t> m{80 + t, 120 - t};
        const auto s = scenario_from_gains(config_with(160, 200, 0.5), gains);
        const auto r = solve_power_minmax_fixed_m(s, m);

        // Grid over (p1, p2) restricted to the budget line, zoomed until the
        // step is below 1e-4 of the budget share.
        double lo = 0.0, hi = 1.0, best_theta = 0.5, best = -std::numeric_limits<double>::infinity();
        for (int zoom = 0; zoom < 8; ++zoom) {
            const int steps = 1000;
            for (int k = 0; k <= steps; ++k) {
                const double theta = lo + (hi - lo) * k / steps;
                const double p1 = theta * 0.5 / static_cast<double>(m[0]);
                const double p2 = (1.0 - theta) * 0.5 / static_cast<double>(m[1]);
                const double v = std::min(margin_of(p1, gains[0], m[0], 160), margin_of(p2, gains[1], m[1], 160));
                if (v > best) {
                    best = v;
                    best_theta = theta;
                }
            }
            const double w = (hi - lo) / 100.0;
            lo = std::max(0.0, best_theta - w);
            hi = std::min(1.0, best_theta + w);
        }
        EXPECT_NEAR(r.worst.g, best, 1e-3);
        EXPECT_GE(r.worst.g, best - 1e-9);
    }
}

TEST(SymbolsMinmax, SingleVehicleAndSymmetry) {
    const std::vector<double> one{100.0};
    EXPECT_EQ(solve_symbols_minmax_fixed_p(scenario_from_gains(config_with(160, 200), one), 0.05).alloc.blocklengths,
              (std::vector<std::int64_t>{200}));
    const std::vector<double> same(7, 500.0);
    const auto r = solve_symbols_minmax_fixed_p(scenario_from_gains(config_with(160, 200), same), 0.05);
    for (auto m : r.alloc.blocklengths) {
        EXPECT_GE(m, 200 / 7);
        EXPECT_LE(m, 200 / 7 + 1);
    }
    EXPECT_EQ(r.alloc.symbols_used(), 200);
}

TEST(SymbolsMinmax, MatchesEnumerationOnPairs) {
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<std::int64_t> m_dist(2, 60), d_dist(8, 160);
    for (int t = 0; t < 200; ++t) {
        const auto budget = m_dist(gen);
        const auto d = d_dist(gen);
        const auto gains = random_gains(gen, 2, 0.0, 5.0);
        const auto s = scenario_from_gains(config_with(d, budget), gains);
        const double p = 0.05;
        const auto r = solve_symbols_minmax_fixed_p(s, p);
        double best = -std::numeric_limits<double>::infinity();
        for (std::int64_t m1 = 1; m1 < budget; ++m1)
            best = std::max(best, std::min(fbl::margin(p * gains[0], m1, d).g,
                                           fbl::margin(p * gains[1], budget - m1, d).g));
        EXPECT_EQ(r.worst.g, best);
        EXPECT_EQ(r.alloc.symbols_used(), budget);
    }
}

TEST(SymbolsMinmax, Errors) {
    const std::vector<double> gains{1.0, 2.0};
    EXPECT_THROW(solve_symbols_minmax_fixed_p(scenario_from_gains(config_with(160, 1), gains), 1.0), infeasible_error);
    EXPECT_THROW(solve_symbols_minmax_fixed_p(scenario_from_gains(config_with(160, 10), gains), 0.0),
                 elid::domain_error);
}

TEST(JointMinmax, SingleVehicle) {
    const std::vector<double> gains{700.0};
    const auto s = scenario_from_gains(config_with(160, 200, 10.0), gains);
    const auto r = solve_joint_minmax(s);
    EXPECT_EQ(r.alloc.blocklengths, (std::vector<std::int64_t>{200}));
    EXPECT_NEAR(r.alloc.powers[0], 0.05, 1e-9 * 0.05);
    EXPECT_NEAR(r.worst.g, margin_of(0.05, 700.0, 200, 160), 1e-9);
}

TEST(JointMinmax, IdenticalLinks) {
    const std::vector<double> gains(4, 400.0);
    const auto s = scenario_from_gains(config_with(160, 200, 5.0), gains);
    const auto r = solve_joint_minmax(s);
    const auto eq = solve_power_minmax_fixed_m(s, equal_split(200, 4));
    for (auto m : r.alloc.blocklengths)
        EXPECT_NEAR(static_cast<double>(m), 50.0, 1.0);
    EXPECT_NEAR(r.worst.g, eq.worst.g, 1e-9);
}

TEST(JointMinmax, SmallBudgetPairMatchesBruteForce) {
    std::mt19937_64 gen(123);
    int compared = 0;
    for (int t = 0; t < 40; ++t) {
        const auto gains = random_gains(gen, 2, 2.0, 3.0);
        const auto s = scenario_from_gains(config_with(32, 40, 0.4), gains);
        try {
            const auto r = solve_joint_minmax(s);
            const auto b = brute_force_minmax(s);
            expect_feasible(s, r);
            EXPECT_NEAR(r.worst.g, b.worst.g, 1e-6) << gains[0] << ' ' << gains[1];
            EXPECT_LE(r.total_energy, s.config.energy_budget * (1 + 1e-12));
            ++compared;
        } catch (const infeasible_error&) {
        }
    }
    EXPECT_GT(compared, 20);
}

TEST(JointMinmax, BruteForceNeverWorseAndBoundsRespected) {
    std::mt19937_64 gen(55);
    std::uniform_int_distribution<std::int64_t> m_dist(10, 100);
    for (int t = 0; t < 60; ++t) {
        const auto n = static_cast<std::size_t>(1 + t % 3);
        const auto budget = n == 3 ? std::min<std::int64_t>(m_dist(gen), 40) : m_dist(gen);
        const auto s = scenario_from_gains(config_with(48, budget, 1.0), random_gains(gen, n, 2.0, 3.5));
        try {
            const auto r = solve_joint_minmax(s);
            const auto b = brute_force_minmax(s);
            const auto bounds = joint_bounds(s);
            EXPECT_GE(b.worst.g, r.worst.g - 1e-9);
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_GE(r.alloc.blocklengths[i], bounds.lower[i]);
                EXPECT_LE(r.alloc.blocklengths[i], bounds.upper[i]);
            }
        } catch (const infeasible_error&) {
        }
    }
}

TEST(JointMinmax, InfeasibleLowerBound) {
    const std::vector<double> gains{1.0, 1000.0};
    try {
        solve_joint_minmax(scenario_from_gains(config_with(160, 200, 1e-3), gains));
        FAIL();
    } catch (const infeasible_error& e) {
        EXPECT_EQ(e.bound(), binding_bound::lower_blocklength);
    }
}

TEST(JointMinmax, InfeasibleBoundSum) {
    // Each vehicle alone needs ~33 symbols; three of them do not fit in 50.
    const std::vector<double> gains{1000.0, 1000.0, 1000.0};
    auto cfg = config_with(160, 50, 1.0);
    const auto lb = fbl::min_blocklength(1000.0, 160, 50);
    ASSERT_TRUE(lb.has_value());
    ASSERT_GT(3 * *lb, 50);
    try {
        solve_joint_minmax(scenario_from_gains(cfg, gains));
        FAIL();
    } catch (const infeasible_error& e) {
        EXPECT_EQ(e.bound(), binding_bound::blocklength_sum);
    }
}

TEST(BruteForce, SymmetricAndGuarded) {
    const std::vector<double> pair{300.0, 300.0};
    const auto b = brute_force_energy(scenario_from_gains(config_with(160, 100), pair), g_1e9);
    EXPECT_EQ(b.alloc.blocklengths, (std::vector<std::int64_t>{50, 50}));
    const auto mm = brute_force_minmax(scenario_from_gains(config_with(64, 60, 2.0), pair));
    EXPECT_EQ(mm.alloc.blocklengths[0], mm.alloc.blocklengths[1]);

    const std::vector<double> four(4, 1.0), three(3, 1.0);
    EXPECT_THROW(brute_force_energy(scenario_from_gains(config_with(160, 60), four), g_1e9), elid::domain_error);
    EXPECT_THROW(brute_force_minmax(scenario_from_gains(config_with(160, 101), three)), elid::domain_error);
}

TEST(BruteForce, SingleVehicleEnergyScan) {
    const std::vector<double> gains{250.0};
    const auto s = scenario_from_gains(config_with(160, 100), gains);
    const auto b = brute_force_energy(s, g_1e9);
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t m = 1; m <= 100; ++m)
        best = std::min(best, static_cast<double>(m) * power_for(250.0, m, 160, g_1e9));
    EXPECT_NEAR(b.total_energy, best, 1e-12 * best);
    EXPECT_EQ(b.alloc.blocklengths[0], 100);
}

TEST(OracleSuite, GreedyExactAndSharingExactUpToTwoVehicles) {
    oracle::options opt;
    opt.n_values = {1, 2};
    const auto res = oracle::run(opt);
    ASSERT_EQ(res.suites.size(), 2u);
    for (const auto& s : res.suites) {
        EXPECT_GE(s.checked, 200);
        EXPECT_EQ(s.failed, 0) << s.name;
        EXPECT_EQ(s.gaps, 0) << s.name;
    }
}

TEST(OracleSuite, DefaultRunPasses) {
    oracle::options opt;
    opt.dump_dir = std::filesystem::temp_directory_path() / "elid_oracle_dumps";
    const auto res = oracle::run(opt);
    ASSERT_EQ(res.suites.size(), 2u);
    EXPECT_EQ(res.suites[0].failed, 0) << res.suites[0].name;
    // Three-vehicle instances may show local-search gaps, but none above 2%.
    EXPECT_EQ(res.suites[1].failed, 0) << res.suites[1].name << ": " << res.suites[1].gaps << " gaps, dumps in "
                                       << opt.dump_dir.string();
}

TEST(OracleSuite, ForcedFailureIsReported) {
    oracle::options opt;
    opt.instances = 5;
    opt.force_failure = true;
    EXPECT_FALSE(oracle::run(opt).passed());
}
