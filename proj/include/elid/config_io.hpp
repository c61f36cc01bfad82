#ifndef ELID_CONFIG_IO_HPP
#define ELID_CONFIG_IO_HPP

// Flat key=value configuration files and solve reports.
//
//   # comment
//   payload_bits = 160
//   symbol_budget = 200
//
// Keys: payload_bits, symbol_budget, energy_budget, target_eps, alpha,
// bandwidth, noise_psd_dbm_hz, road_length, mount_height, rician_k_db,
// max_vehicles, p_common. Missing keys keep their defaults; unknown keys are
// errors.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "allocators.hpp"
#include "config.hpp"
#include "errors.hpp"

namespace elid {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw config_error("key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
    return out;
}

inline std::int64_t parse_int(std::string_view key, std::string_view v) {
    std::int64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw config_error("key '" + std::string(key) + "': expected an integer, got '" + std::string(v) + "'");
    return out;
}

} // namespace detail

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "payload_bits", "symbol_budget", "energy_budget", "target_eps",   "alpha",        "bandwidth",
        "noise_psd_dbm_hz", "road_length", "mount_height", "rician_k_db", "max_vehicles", "p_common"};
    return keys;
}

/// Sets one key; throws config_error for unknown keys or malformed values.
/// Does not validate the resulting config.
inline void apply_setting(system_config& c, std::string_view key, std::string_view value) {
    using detail::parse_double;
    using detail::parse_int;
    value = detail::trim(value);
    if (key == "payload_bits") c.payload_bits = parse_int(key, value);
    else if (key == "symbol_budget") c.symbol_budget = parse_int(key, value);
    else if (key == "energy_budget") c.energy_budget = parse_double(key, value);
    else if (key == "target_eps") c.target_eps = parse_double(key, value);
    else if (key == "alpha") c.alpha = parse_int(key, value);
    else if (key == "bandwidth") c.bandwidth = parse_double(key, value);
    else if (key == "noise_psd_dbm_hz") c.noise_psd_dbm_hz = parse_double(key, value);
    else if (key == "road_length") c.road_length = parse_double(key, value);
    else if (key == "mount_height") c.mount_height = parse_double(key, value);
    else if (key == "rician_k_db") c.rician_k_db = parse_double(key, value);
    else if (key == "max_vehicles") c.max_vehicles = parse_int(key, value);
    else if (key == "p_common") c.p_common = parse_double(key, value);
    else throw config_error("unknown key '" + std::string(key) + "'");
}

/// Applies a "key=value" override.
inline void apply_override(system_config& c, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw config_error("override '" + std::string(assignment) + "' is not of the form key=value");
    apply_setting(c, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

/// Parses config text on top of `base` (the defaults unless given),
/// without validation.
inline system_config parse_config_text(std::string_view text, system_config c = {}) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw config_error("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        if (key.empty())
            throw config_error("line " + std::to_string(line_no) + ": empty key");
        try {
            apply_setting(c, key, line.substr(eq + 1));
        } catch (const config_error& e) {
            throw config_error("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

inline system_config parse_config(const std::string& path, system_config base = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw config_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    auto c = parse_config_text(ss.str(), std::move(base));
    validate(c);
    return c;
}

/// Machine-readable solve report: flat key=value lines; vectors are
/// comma-separated, one element per vehicle.
inline void write_report(std::ostream& os, const alloc::solve_report& r) {
    auto join = [&](const auto& v, auto&& fmt) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i)
                s += ',';
            s += fmt(v[i]);
        }
        return s;
    };
    auto num = [](double x) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    os << "solver_name=" << r.solver_name << '\n';
    os << "n=" << r.alloc.powers.size() << '\n';
    os << "powers=" << join(r.alloc.powers, num) << '\n';
    os << "blocklengths=" << join(r.alloc.blocklengths, [](std::int64_t x) { return std::to_string(x); }) << '\n';
    os << "margins=" << join(r.margins, [&](const auto& m) { return num(m.g); }) << '\n';
    os << "eps_log10=" << join(r.margins, [&](const auto& m) { return num(m.eps_log10); }) << '\n';
    os << "worst_margin=" << num(r.worst.g) << '\n';
    os << "worst_eps_log10=" << num(r.worst.eps_log10) << '\n';
    os << "total_energy=" << num(r.total_energy) << '\n';
    os << "iterations=" << r.iterations << '\n';
    os << "converged=" << (r.converged ? "true" : "false") << '\n';
    os << "clamped=" << join(r.clamped, [](bool b) { return std::string(b ? "1" : "0"); }) << '\n';
    os << "trace=" << join(r.trace, [&](const auto& t) { return std::to_string(t.iteration) + ":" + num(t.value); })
       << '\n';
}

} // namespace elid

#endif
