#ifndef ELID_RNG_HPP
#define ELID_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace elid {

/// SplitMix64 finalizer; used to derive independent stream keys.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t combine_keys(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

/// FNV-1a, for folding names into seeds.
constexpr std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seedable random stream with portable conversions.
///
/// The engine's output sequence is fixed by the standard; the uniform and
/// normal conversions are written out so draws are identical on every
/// standard library.
class random_stream {
public:
    explicit random_stream(std::uint64_t key) : engine_(mix64(key)) {}

    /// Child stream keyed by (this stream's key, sub).
    static random_stream substream(std::uint64_t key, std::uint64_t sub) {
        return random_stream(combine_keys(key, sub));
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace elid

#endif
