#pragma once
// Error types shared across the library. The CLI maps them to exit codes:
// ConfigError -> 1, NumericsError -> 2, IdentityError -> 3.

#include <stdexcept>
#include <string>

namespace qbm {

// Bad user input: malformed config, invalid parameter ranges, unknown options.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical guard tripped: step-size refusal, memory budget, tail truncation,
// divergent integral, factorization failure.
struct NumericsError : std::runtime_error {
    explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

// A physical identity that must hold came out above threshold.
struct IdentityError : std::runtime_error {
    explicit IdentityError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qbm
