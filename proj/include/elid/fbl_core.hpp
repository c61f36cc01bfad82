#ifndef ELID_FBL_CORE_HPP
#define ELID_FBL_CORE_HPP

// Finite-blocklength building blocks: Gaussian tail, normal approximation of
// the maximal coding rate, decoder error probability and the scalar
// inversions the allocators are built on.
//
// Everything here is a pure function.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include "errors.hpp"

namespace elid::fbl {

inline constexpr double ln2 = std::numbers::ln2;

enum class dispersion_mode {
    unit,  // v = 1, the high-SNR simplification (default)
    exact, // v = 1 - 1/(1+snr)^2
};

/// Q-argument of the decoder error probability and its log10 companion.
///
/// `eps_log10` stays finite for every finite `g`, including margins whose
/// error probability underflows a double.
struct reliability_margin {
    double g = 0.0;
    double eps_log10 = std::log10(0.5);

    double eps() const;
    bool operator==(const reliability_margin&) const = default;
};

struct short_packet_params {
    std::int64_t payload_bits = 1;
    std::int64_t blocklength = 1;
    double snr = 0.0;
    dispersion_mode mode = dispersion_mode::unit;
};

namespace detail {

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x))
        throw domain_error(std::string(what) + ": argument must be finite");
}

// ln Q(x) for large positive x from the asymptotic series
// Q(x) ~ phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8).
inline double log_q_asymptotic(double x) {
    const double r = 1.0 / (x * x);
    const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
    return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Acklam's rational approximation of the lower-tail normal quantile,
// relative error ~1.2e-9; used as the starting point for refinement.
inline double normal_quantile_seed(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

} // namespace detail

/// Standard Gaussian tail probability Q(x) = P[N(0,1) > x].
///
/// Computed as erfc(x/sqrt(2))/2; relative error below 1e-12 on |x| <= 8.
/// Underflows to 0 beyond x ~ 38.5; use `q_function_log10` there.
inline double q_function(double x) {
    detail::require_finite(x, "q_function");
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// log10 Q(x), finite for every finite x.
inline double q_function_log10(double x) {
    detail::require_finite(x, "q_function_log10");
    if (x < 37.0)
        return std::log10(q_function(x));
    return detail::log_q_asymptotic(x) / std::numbers::ln10;
}

/// Inverse of the Gaussian tail: returns x with Q(x) = eps.
inline double q_inverse(double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw domain_error("q_inverse: eps must lie in (0, 1)");
    if (eps == 0.5)
        return 0.0;
    // Q(-x) = 1 - Q(x); 1 - eps is exact for eps in (0.5, 1).
    if (eps > 0.5)
        return -q_inverse(1.0 - eps);

    double x = -detail::normal_quantile_seed(eps);
    // Halley steps on f(x) = Q(x) - eps.
    for (int it = 0; it < 3; ++it) {
        const double pdf = detail::normal_pdf(x);
        if (pdf == 0.0)
            break;
        const double u = (q_function(x) - eps) / pdf;
        x += u / (1.0 - 0.5 * x * u);
    }
    return x;
}

/// Channel dispersion of the AWGN channel, 1 - 1/(1+snr)^2.
inline double channel_dispersion(double snr) {
    detail::require_finite(snr, "channel_dispersion");
    if (snr < 0.0)
        throw domain_error("channel_dispersion: snr must be nonnegative");
    const double a = 1.0 / (1.0 + snr);
    return 1.0 - a * a;
}

inline double shannon_capacity(double snr) {
    detail::require_finite(snr, "shannon_capacity");
    if (snr < 0.0)
        throw domain_error("shannon_capacity: snr must be nonnegative");
    return std::log1p(snr) / ln2;
}

inline void validate(const short_packet_params& p) {
    if (p.payload_bits < 1)
        throw domain_error("payload_bits must be >= 1");
    if (p.blocklength < 1)
        throw domain_error("blocklength must be >= 1");
    if (!(p.snr >= 0.0) || !std::isfinite(p.snr))
        throw domain_error("snr must be finite and nonnegative");
}

/// Normal approximation of the maximal coding rate in bits per channel use.
/// May be negative; feasibility is the caller's concern.
inline double achievable_rate(const short_packet_params& p, double eps) {
    validate(p);
    const double qinv = q_inverse(eps);
    const double v = p.mode == dispersion_mode::unit ? 1.0 : channel_dispersion(p.snr);
    return shannon_capacity(p.snr) -
           std::sqrt(v / static_cast<double>(p.blocklength)) * qinv / ln2;
}

/// Margin g such that the decoder error probability is Q(g):
///   g = sqrt(m) ln(1+snr) - ln2 D / sqrt(m)        (unit dispersion)
/// and the same bracket divided by sqrt(v) in exact mode.
inline reliability_margin margin(double snr, std::int64_t m, std::int64_t payload_bits,
                                 dispersion_mode mode = dispersion_mode::unit) {
    validate({payload_bits, m, snr, mode});
    const double sm = std::sqrt(static_cast<double>(m));
    double g = sm * std::log1p(snr) - ln2 * static_cast<double>(payload_bits) / sm;
    if (mode == dispersion_mode::exact) {
        const double v = channel_dispersion(snr);
        if (v == 0.0)
            throw domain_error("reliability margin: exact dispersion is singular at snr = 0");
        g /= std::sqrt(v);
    }
    return {g, q_function_log10(g)};
}

/// Wraps an already computed Q-argument.
inline reliability_margin margin_from_g(double g) {
    return {g, q_function_log10(g)};
}

inline double reliability_margin::eps() const {
    return q_function(g);
}

/// Smallest power (W) for which a link with normalized gain `norm_gain`
/// (|h|^2/sigma^2, per watt) reaches margin `g_target` with blocklength m.
/// Clamped below at zero.
inline double min_power_for_target(double norm_gain, std::int64_t m, std::int64_t payload_bits,
                                   double g_target) {
    if (!(norm_gain > 0.0) || !std::isfinite(norm_gain))
        throw domain_error("min_power_for_target: norm_gain must be positive");
    if (m < 1 || payload_bits < 1)
        throw domain_error("min_power_for_target: m and D must be >= 1");
    const double md = static_cast<double>(m);
    const double exponent = ln2 * static_cast<double>(payload_bits) / md + g_target / std::sqrt(md);
    if (exponent <= 0.0)
        return 0.0;
    return std::expm1(exponent) / norm_gain;
}

/// Right-hand side of the blocklength feasibility test, m (2^{D/m} - 1).
inline double blocklength_energy_threshold(std::int64_t m, std::int64_t payload_bits) {
    const double md = static_cast<double>(m);
    return md * std::expm1(ln2 * static_cast<double>(payload_bits) / md);
}

/// Smallest m in [1, M] with budget_gain > m (2^{D/m} - 1), where
/// budget_gain = |h|^2 E_tot / sigma^2.  Empty when no such m exists.
///
/// The threshold is strictly decreasing in m, so the predicate is monotone
/// and a binary search suffices.
inline std::optional<std::int64_t> min_blocklength(double budget_gain, std::int64_t payload_bits,
                                                   std::int64_t symbol_budget) {
    if (!(budget_gain > 0.0) || payload_bits < 1 || symbol_budget < 1)
        throw domain_error("min_blocklength: inputs must be positive");
    auto ok = [&](std::int64_t m) {
        return budget_gain > blocklength_energy_threshold(m, payload_bits);
    };
    if (!ok(symbol_budget))
        return std::nullopt;
    std::int64_t lo = 0, hi = symbol_budget; // ok(hi) holds, ok(lo) treated false
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// M minus the lower bounds of every other vehicle.
inline std::int64_t upper_blocklength(std::span<const std::int64_t> lower_bounds, std::size_t i,
                                      std::int64_t symbol_budget) {
    if (i >= lower_bounds.size())
        throw domain_error("upper_blocklength: index out of range");
    std::int64_t total = 0;
    for (auto lb : lower_bounds)
        total += lb;
    if (total > symbol_budget)
        throw infeasible_error(binding_bound::blocklength_sum,
                               "sum of blocklength lower bounds (" + std::to_string(total) +
                                   ") exceeds the symbol budget (" + std::to_string(symbol_budget) + ")");
    return symbol_budget - (total - lower_bounds[i]);
}

/// Number of symbols that fit in `t_max` seconds at `bandwidth` Hz (one
/// symbol per 1/B seconds).
inline std::int64_t symbols_for_latency(double t_max, double bandwidth) {
    if (!(t_max > 0.0) || !(bandwidth > 0.0))
        throw domain_error("symbols_for_latency: inputs must be positive");
    // Relative slack absorbs products like 0.2e-3 * 1e6 = 199.99999999999997.
    return static_cast<std::int64_t>(std::floor(t_max * bandwidth * (1.0 + 1e-12)));
}

/// Downlink latency: queuing + ELiD processing + frame alignment +
/// transmission interval + vehicle processing.
inline double latency_budget(double queuing, double elid_processing, double frame_alignment,
                             double transmission, double vehicle_processing) {
    for (double d : {queuing, elid_processing, frame_alignment, transmission, vehicle_processing})
        if (!(d >= 0.0))
            throw domain_error("latency_budget: delays must be nonnegative");
    return queuing + elid_processing + frame_alignment + transmission + vehicle_processing;
}

} // namespace elid::fbl

#endif
