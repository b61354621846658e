#include "bsde/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bsde {

void Thresholds::validate(std::size_t dimension) const {
    if (!(increment_bound > 0.0)) throw std::invalid_argument("Thresholds: R_0 must be positive");
    if (state_bounds.size() != dimension)
        throw std::invalid_argument("Thresholds: need one state bound per dimension");
    for (double r : state_bounds)
        if (!(r > 0.0)) throw std::invalid_argument("Thresholds: state bounds must be positive");
    if (clamp_override && !(*clamp_override > 0.0))
        throw std::invalid_argument("Thresholds: clamp override must be positive");
}

double clamp_increment(double dw, double r0, double h) {
    const double level = r0 * std::sqrt(h);
    return std::clamp(dw, -level, level);
}

double clamp_symmetric(double v, double level) { return std::clamp(v, -level, level); }

void clamp_state(std::span<const double> x, std::span<const double> bounds, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], -bounds[i], bounds[i]);
}

double clamped_driver(const Driver& driver, std::span<const double> bounds, double t,
                      std::span<const double> x, double y, std::span<const double> z) {
    thread_local std::vector<double> xr;
    xr.resize(x.size());
    clamp_state(x, bounds, xr);
    return driver.f(t, xr, y, z);
}

double clamped_terminal(const TerminalCondition& terminal, std::span<const double> bounds,
                        std::span<const double> x) {
    thread_local std::vector<double> xr;
    xr.resize(x.size());
    clamp_state(x, bounds, xr);
    return terminal.phi(xr);
}

double clamped_obstacle(const Obstacle& obstacle, std::span<const double> bounds, double t,
                        std::span<const double> x) {
    thread_local std::vector<double> xr;
    xr.resize(x.size());
    clamp_state(x, bounds, xr);
    return obstacle.phi(t, xr);
}

namespace {

// Visits the points of a regular grid with `per_axis` nodes per axis on [-R_i, R_i].
template <class F>
void for_each_box_node(std::span<const double> bounds, F&& visit) {
    const std::size_t d = bounds.size();
    constexpr double budget = 20000.0;
    const auto per_axis = static_cast<std::size_t>(
        std::max(2.0, std::floor(std::pow(budget, 1.0 / static_cast<double>(d)))));
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    while (true) {
        for (std::size_t i = 0; i < d; ++i)
            x[i] = -bounds[i] + 2.0 * bounds[i] * static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
        visit(std::span<const double>(x));
        std::size_t i = 0;
        while (i < d && ++idx[i] == per_axis) idx[i++] = 0;
        if (i == d) break;
    }
}

}  // namespace

double estimate_terminal_sup(const TerminalCondition& terminal, std::span<const double> bounds) {
    double sup = 0.0;
    for_each_box_node(bounds, [&](std::span<const double> x) { sup = std::max(sup, std::abs(terminal.phi(x))); });
    return sup;
}

double estimate_driver_sup(const Driver& driver, std::span<const double> bounds, const TimeGrid& grid,
                           std::size_t brownian_dimension) {
    const std::vector<double> zero(brownian_dimension, 0.0);
    double sup = 0.0;
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        const double t = grid.time(k);
        for_each_box_node(bounds, [&](std::span<const double> x) {
            sup = std::max(sup, std::abs(driver.f(t, x, 0.0, zero)));
        });
    }
    return sup;
}

ClampLevel compute_cy(const Thresholds& thresholds, const Driver& driver, const TerminalCondition& terminal,
                      const TimeGrid& grid, std::size_t brownian_dimension) {
    if (thresholds.clamp_override) return {*thresholds.clamp_override, false, true};
    if (!(driver.lipschitz > 0.0))
        throw std::invalid_argument("compute_cy: C_f must be positive unless an explicit clamp is given");
    if (brownian_dimension == 0) throw std::invalid_argument("compute_cy: q must be >= 1");

    ClampLevel level;
    double sup_phi = 0.0;
    if (terminal.sup_abs) {
        sup_phi = *terminal.sup_abs;
    } else {
        sup_phi = estimate_terminal_sup(terminal, thresholds.state_bounds);
        level.estimated = true;
    }
    double sup_f = 0.0;
    if (driver.sup_at_origin) {
        sup_f = *driver.sup_at_origin;
    } else {
        sup_f = estimate_driver_sup(driver, thresholds.state_bounds, grid, brownian_dimension);
        level.estimated = true;
    }

    const auto q = static_cast<double>(brownian_dimension);
    const double gamma = 4.0 * q * driver.lipschitz * driver.lipschitz;
    const double t = grid.horizon();
    const double growth = std::exp((2.0 * gamma + (1.0 + gamma) / q) * t);
    // Written so that sup_f = 0 never multiplies an overflowing ratio.
    const double driver_term = sup_f == 0.0 ? 0.0 : 2.0 * t * (1.0 + gamma) / gamma * sup_f * sup_f;
    level.value = std::sqrt(growth * (sup_phi * sup_phi + driver_term));
    return level;
}

}  // namespace bsde
