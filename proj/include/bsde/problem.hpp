#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bsde {

/// Generator f(t, x, y, z) of the backward equation.
struct Driver {
    std::function<double(double t, std::span<const double> x, double y, std::span<const double> z)> f;
    /// Declared Lipschitz constant C_f.
    double lipschitz = 0.0;
    /// sup_{t,x} |f^R(t, x, 0, 0)| if known; estimated on a grid otherwise.
    std::optional<double> sup_at_origin;
};

/// Terminal function phi(x).
struct TerminalCondition {
    std::function<double(std::span<const double> x)> phi;
    /// sup_x |phi^R(x)| if known; estimated on a grid otherwise.
    std::optional<double> sup_abs;
};

/// Obstacle phi(t, x) of a reflected equation; phi(T, .) is the terminal condition.
struct Obstacle {
    std::function<double(double t, std::span<const double> x)> phi;
    std::optional<double> sup_abs;
};

/// Truncation levels R = (R_0, R_1, ..., R_d) and an optional explicit
/// clamp level replacing the computed C_y.
struct Thresholds {
    /// R_0, in standard deviations: increments are clamped at R_0 sqrt(h).
    double increment_bound = 5.0;
    /// R_1..R_d: state arguments of f and phi are clamped componentwise to [-R_i, R_i].
    std::vector<double> state_bounds;
    std::optional<double> clamp_override;

    void validate(std::size_t dimension) const;
};

}  // namespace bsde
