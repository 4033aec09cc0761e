// Error taxonomy shared by all modules. The CLI maps these onto exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace noonsim {

// Bad definitions: unknown labels, inconsistent constraints, invalid config values.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Problem too large for the configured dense solver limits.
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (norm drift, non-convergent exponential, ...).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Postselection has empty support (e.g. heralding with zero detector efficiency).
struct PostselectionError : std::runtime_error {
    explicit PostselectionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller broke a documented precondition (non-hermitian generator, mismatched systems).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace noonsim
