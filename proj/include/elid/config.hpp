#ifndef ELID_CONFIG_HPP
#define ELID_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "errors.hpp"

namespace elid {

/// Global scalars of one ELiD cell. Defaults reproduce the factory-floor
/// simulation setup (20-byte packets, 1 MHz, -180 dBm/Hz, 397 m road).
struct system_config {
    std::int64_t payload_bits = 160;
    std::int64_t symbol_budget = 200;
    double energy_budget = 10.0; // joules
    double target_eps = 1e-9;
    std::int64_t alpha = 1;
    double bandwidth = 1e6;          // Hz
    double noise_psd_dbm_hz = -180.0;
    double road_length = 397.0;      // m
    double mount_height = 10.0;      // m
    double rician_k_db = 10.0;
    std::int64_t max_vehicles = 10;
    // Common power for the fixed-power symbol allocation; E_tot / M when unset.
    std::optional<double> p_common;

    double common_power() const {
        return p_common ? *p_common : energy_budget / static_cast<double>(symbol_budget);
    }

    bool operator==(const system_config&) const = default;
};

/// Throws config_error naming the first violated invariant.
inline void validate(const system_config& c) {
    auto fail = [](const std::string& what) { throw config_error("invalid config: " + what); };
    if (c.payload_bits < 1) fail("payload_bits >= 1");
    if (c.symbol_budget < 1) fail("symbol_budget >= 1");
    if (!(c.energy_budget > 0.0) || !std::isfinite(c.energy_budget)) fail("energy_budget > 0");
    if (!(c.target_eps > 0.0 && c.target_eps < 1.0)) fail("0 < target_eps < 1");
    if (c.alpha < 1) fail("alpha >= 1");
    if (!(c.bandwidth > 0.0) || !std::isfinite(c.bandwidth)) fail("bandwidth > 0");
    if (!std::isfinite(c.noise_psd_dbm_hz)) fail("noise_psd_dbm_hz finite");
    if (!(c.road_length >= 0.0) || !std::isfinite(c.road_length)) fail("road_length >= 0");
    if (!(c.mount_height > 0.0) || !std::isfinite(c.mount_height)) fail("mount_height > 0");
    if (std::isnan(c.rician_k_db)) fail("rician_k_db is a number");
    if (c.max_vehicles < 1) fail("max_vehicles >= 1");
    if (c.p_common && (!(*c.p_common > 0.0) || !std::isfinite(*c.p_common))) fail("p_common > 0");
}

} // namespace elid

#endif
