#pragma once

#include "bsde/problem.hpp"
#include "bsde/time_grid.hpp"

#include <cstddef>
#include <span>

namespace bsde {

/// [dW]_w: clamp to [-R_0 sqrt(h), R_0 sqrt(h)].
double clamp_increment(double dw, double r0, double h);

/// [v]_level: clamp to [-level, level]. Used for [.]_y (level C_y) and for
/// [.]_z and [.]_v (level C_y / sqrt(h)).
double clamp_symmetric(double v, double level);

/// Componentwise clamp of x to the box [-R_i, R_i].
void clamp_state(std::span<const double> x, std::span<const double> bounds, std::span<double> out);

/// f^R, phi^R: the original functions composed with clamp_state. The y and
/// z arguments are passed through unchanged.
double clamped_driver(const Driver& driver, std::span<const double> bounds, double t,
                      std::span<const double> x, double y, std::span<const double> z);
double clamped_terminal(const TerminalCondition& terminal, std::span<const double> bounds,
                        std::span<const double> x);
double clamped_obstacle(const Obstacle& obstacle, std::span<const double> bounds, double t,
                        std::span<const double> x);

struct ClampLevel {
    double value = 0.0;
    /// True when a sup-norm was estimated on a grid rather than declared.
    bool estimated = false;
    bool overridden = false;
};

/// Stability bound C_y used by [.]_y. With gamma = 4 q C_f^2,
///   B = exp((2 gamma + (1 + gamma) / q) T) * (sup|phi^R|^2 + 2T (1 + gamma)/gamma sup|f^R(.,.,0,0)|^2)
/// is a bound in squared units; the returned level is sqrt(B). An explicit
/// override in `thresholds` is returned as is.
/// Throws std::invalid_argument when C_f <= 0 and no override is given.
ClampLevel compute_cy(const Thresholds& thresholds, const Driver& driver, const TerminalCondition& terminal,
                      const TimeGrid& grid, std::size_t brownian_dimension);

/// Grid estimates of sup|phi^R| and sup|f^R(t,x,0,0)| over the box
/// [-R, R]^d (which is exact for the clamped functions up to grid
/// resolution). Not rigorous.
double estimate_terminal_sup(const TerminalCondition& terminal, std::span<const double> bounds);
double estimate_driver_sup(const Driver& driver, std::span<const double> bounds, const TimeGrid& grid,
                           std::size_t brownian_dimension);

}  // namespace bsde
