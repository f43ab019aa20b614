#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fkmc {

// A defining momentum integral has no finite value for the requested
// parameters (e.g. the diagonal of the pair potential at epsilon = 0).
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// The quadrature engine could not certify the requested tolerance:
// the analytic tail bound cannot be brought below abs_tol, or the
// panel/refinement budget was exhausted first.
struct QuadratureError : std::runtime_error {
    explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

// A tabulated kernel failed its post-build validation against direct
// quadrature probes.
struct TableValidationError : std::runtime_error {
    explicit TableValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A Monte Carlo estimate could not be formed reliably: a path weight
// exceeded the log-weight cap, or a derived quantity (e.g. the log of a
// non-positive mean) is undefined.  weight_cap_hits carries the number of
// offending paths when the cap triggered the failure (0 otherwise), so
// reporting layers can surface the count without parsing the message.
struct EstimatorError : std::runtime_error {
    explicit EstimatorError(const std::string& what, int64_t cap_hits = 0)
        : std::runtime_error(what), weight_cap_hits(cap_hits) {}
    int64_t weight_cap_hits = 0;
};

// Configuration file or flag errors (unknown key, bad value, missing file).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fkmc
