#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace apa {

/// Tensor or layer shape mismatch.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value. `field()` names the offending field.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A loss or gradient became NaN/inf. Carries the training step and, when
/// known, the parameter that went bad.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(std::int64_t step, std::string where)
        : std::runtime_error("non-finite value at step " + std::to_string(step) + " (" + where + ")"),
          step_(step),
          where_(std::move(where)) {}

    std::int64_t step() const noexcept { return step_; }
    const std::string& where() const noexcept { return where_; }

private:
    std::int64_t step_;
    std::string where_;
};

}  // namespace apa
