#ifndef ELID_CHANNEL_MODEL_HPP
#define ELID_CHANNEL_MODEL_HPP

// Link budget and scenario generation for a single elevated LiDAR (ELiD)
// serving vehicles on a straight road section.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace elid::channel {

inline constexpr double path_loss_floor_m = 1.0;

/// One ELiD -> vehicle link.
struct vehicle_link {
    int vehicle_id = 0;
    double distance = 1.0;          // m
    double path_loss_db = 0.0;
    double fading_power_gain = 1.0; // unit mean
    double noise_power = 1.0;       // W
    double norm_gain = 1.0;         // |h|^2 / sigma^2, per watt

    bool operator==(const vehicle_link&) const = default;
};

/// One channel realization: the configuration plus n links.
struct scenario {
    system_config config;
    std::vector<vehicle_link> links;
    std::uint64_t seed = 0;

    std::size_t size() const { return links.size(); }

    std::vector<double> norm_gains() const {
        std::vector<double> g;
        g.reserve(links.size());
        for (const auto& l : links)
            g.push_back(l.norm_gain);
        return g;
    }

    bool operator==(const scenario&) const = default;
};

namespace detail {
inline std::atomic<std::uint64_t>& floor_hits() {
    static std::atomic<std::uint64_t> hits{0};
    return hits;
}
} // namespace detail

/// How often path_loss_db clamped a distance to the 1 m floor.
inline std::uint64_t path_loss_floor_hits() {
    return detail::floor_hits().load(std::memory_order_relaxed);
}

/// 35.3 + 37.6 log10(d) dB, with d clamped to 1 m.
inline double path_loss_db(double distance) {
    if (std::isnan(distance))
        throw domain_error("path_loss_db: distance is NaN");
    if (distance < path_loss_floor_m) {
        detail::floor_hits().fetch_add(1, std::memory_order_relaxed);
        distance = path_loss_floor_m;
    }
    return 35.3 + 37.6 * std::log10(distance);
}

/// Distance at which path_loss_db returns `loss_db` (inverse of the model).
inline double distance_for_path_loss(double loss_db) {
    return std::pow(10.0, (loss_db - 35.3) / 37.6);
}

/// Noise power in watts for a PSD in dBm/Hz over `bandwidth` Hz.
inline double noise_power(double psd_dbm_hz, double bandwidth) {
    if (!(bandwidth > 0.0))
        throw domain_error("noise_power: bandwidth must be positive");
    const double dbw = psd_dbm_hz + 10.0 * std::log10(bandwidth) - 30.0;
    return std::pow(10.0, dbw / 10.0);
}

/// |g|^2 for g = sqrt(K/(K+1)) + sqrt(1/(K+1)) CN(0,1), K = 10^(k_db/10).
/// Unit mean for every K; deterministic 1 at K = +inf, exponential at K = 0.
inline double rician_power_gain(double k_db, random_stream& rng) {
    if (k_db == std::numeric_limits<double>::infinity())
        return 1.0;
    const double k = std::pow(10.0, k_db / 10.0);
    const double los = std::sqrt(k / (k + 1.0));
    const double scatter = std::sqrt(1.0 / (2.0 * (k + 1.0))); // per real dimension
    const double re = los + scatter * rng.normal();
    const double im = scatter * rng.normal();
    return re * re + im * im;
}

/// Builds a link from a horizontal road position and a fading draw.
/// The ELiD sits above the road midpoint.
inline vehicle_link make_link(const system_config& cfg, int vehicle_id, double position,
                              double fading_power_gain) {
    vehicle_link l;
    l.vehicle_id = vehicle_id;
    l.distance = std::hypot(position - 0.5 * cfg.road_length, cfg.mount_height);
    l.path_loss_db = path_loss_db(l.distance);
    l.fading_power_gain = fading_power_gain;
    l.noise_power = noise_power(cfg.noise_psd_dbm_hz, cfg.bandwidth);
    l.norm_gain = std::pow(10.0, -l.path_loss_db / 10.0) * fading_power_gain / l.noise_power;
    return l;
}

/// Per-link substream: adding vehicles never perturbs existing draws.
inline random_stream link_stream(std::uint64_t seed, int vehicle_id) {
    return random_stream::substream(seed, static_cast<std::uint64_t>(vehicle_id));
}

/// Samples n vehicles uniformly on the road with independent Rician fading.
/// A pure function of (config, n, seed).
inline scenario sample_scenario(const system_config& cfg, std::int64_t n, std::uint64_t seed) {
    validate(cfg);
    if (n < 1 || n > cfg.max_vehicles)
        throw domain_error("sample_scenario: n = " + std::to_string(n) + " outside [1, " +
                           std::to_string(cfg.max_vehicles) + "]");
    scenario s{cfg, {}, seed};
    s.links.reserve(static_cast<std::size_t>(n));
    for (int id = 0; id < n; ++id) {
        auto rng = link_stream(seed, id);
        const double position = rng.uniform() * cfg.road_length;
        const double fading = rician_power_gain(cfg.rician_k_db, rng);
        s.links.push_back(make_link(cfg, id, position, fading));
    }
    return s;
}

/// Scenario with prescribed normalized gains (unit fading, common noise);
/// distances are recovered by inverting the path-loss model.
inline scenario scenario_from_gains(const system_config& cfg, std::span<const double> gains,
                                    std::uint64_t seed = 0) {
    scenario s{cfg, {}, seed};
    const double noise = noise_power(cfg.noise_psd_dbm_hz, cfg.bandwidth);
    for (std::size_t i = 0; i < gains.size(); ++i) {
        if (!(gains[i] > 0.0))
            throw domain_error("scenario_from_gains: gains must be positive");
        vehicle_link l;
        l.vehicle_id = static_cast<int>(i);
        l.noise_power = noise;
        l.path_loss_db = -10.0 * std::log10(gains[i] * noise);
        l.distance = distance_for_path_loss(l.path_loss_db);
        l.fading_power_gain = 1.0;
        l.norm_gain = gains[i];
        s.links.push_back(l);
    }
    return s;
}

} // namespace elid::channel

#endif
