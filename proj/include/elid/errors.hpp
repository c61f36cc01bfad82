#ifndef ELID_ERRORS_HPP
#define ELID_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace elid {

/// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Which feasibility bound rejected a problem instance.
enum class binding_bound {
    none,
    lower_blocklength, // no m in [1, M] satisfies the energy/blocklength test
    blocklength_sum,   // sum of per-vehicle lower bounds exceeds M
    symbol_budget,     // fewer symbols than vehicles
};

inline const char* to_string(binding_bound b) {
    switch (b) {
    case binding_bound::lower_blocklength: return "lower-blocklength bound (energy budget too small)";
    case binding_bound::blocklength_sum: return "upper-blocklength bound (sum of lower bounds exceeds M)";
    case binding_bound::symbol_budget: return "symbol budget (M < n)";
    case binding_bound::none: break;
    }
    return "none";
}

/// The optimization problem has no feasible point.
class infeasible_error : public std::runtime_error {
public:
    infeasible_error(binding_bound bound, const std::string& what)
        : std::runtime_error(what), bound_(bound) {}

    binding_bound bound() const noexcept { return bound_; }

private:
    binding_bound bound_;
};

/// Malformed or invalid configuration / invocation.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace elid

#endif
