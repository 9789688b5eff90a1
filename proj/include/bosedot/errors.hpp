// errors.hpp — exception types mapped onto the CLI exit-code contract

#pragma once

#include <stdexcept>
#include <string>

namespace bosedot {

// Bad input: out-of-range parameters, inconsistent dimensions, malformed config.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An iterative method (quadrature, Krylov action, eigensolver) missed its tolerance.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved) + ")")
        , achieved_error(achieved) {}
    double achieved_error{0.0};
};

struct DimensionCapError : std::length_error {
    DimensionCapError(std::size_t requested, std::size_t cap)
        : std::length_error("truncated dimension " + std::to_string(requested) +
                            " exceeds cap " + std::to_string(cap))
        , requested_dim(requested)
        , cap_dim(cap) {}
    std::size_t requested_dim{0};
    std::size_t cap_dim{0};
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

} // namespace bosedot
