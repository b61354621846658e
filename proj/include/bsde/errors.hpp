#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace bsde {

/// Raised when a simulation or regression produces a non-finite value.
/// Carries the offending time step and, when known, the path index.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t step,
                   std::optional<std::size_t> path = std::nullopt)
        : std::runtime_error(what), step_(step), path_(path) {}

    std::size_t step() const noexcept { return step_; }
    std::optional<std::size_t> path() const noexcept { return path_; }

private:
    std::size_t step_;
    std::optional<std::size_t> path_;
};

/// Raised by configuration parsing/validation. `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace bsde
