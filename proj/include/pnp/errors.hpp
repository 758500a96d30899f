#pragma once

#include <stdexcept>
#include <string>

namespace pnp {

/// Invalid configuration or parameter input. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

/// Numerical failure: singular linear system, non-finite state, iteration that
/// did not converge, or an inconclusive convergence-order estimate. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace pnp
