#pragma once

#include <stdexcept>
#include <string>

namespace flockkit {

/// Invalid user input: bad grid parameters, unknown config keys, malformed values.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class NumericalFailure { cfl_violation, vacuum, nonpositive_omega, non_finite };

/// A numerical step could not be completed (CFL, vacuum, negative scaling factor).
class NumericalError : public std::runtime_error {
public:
    NumericalError(NumericalFailure kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] NumericalFailure kind() const noexcept { return kind_; }

private:
    NumericalFailure kind_;
};

/// What to do when a requested time step exceeds a stability bound.
enum class CflPolicy { error, warn, ignore };

} // namespace flockkit
