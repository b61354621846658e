#include "bsde/reflected.hpp"

#include "backward_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bsde {

namespace {

TerminalCondition terminal_of(const Obstacle& obstacle, const TimeGrid& grid) {
    const double t_end = grid.horizon();
    auto phi = obstacle.phi;
    return {[phi, t_end](std::span<const double> x) { return phi(t_end, x); }, obstacle.sup_abs};
}

}  // namespace

ReflectedSolution solve_max(const PathCloud& cloud, const HypercubeBasis& basis, const Driver& driver,
                            const Obstacle& obstacle, const Thresholds& thresholds, const TimeGrid& grid) {
    return detail::BackwardEngine::run(cloud, basis, basis, driver, terminal_of(obstacle, grid), thresholds, grid,
                                       {Method::max, &obstacle, 0.0});
}

ReflectedSolution solve_penalized(const PathCloud& cloud, const HypercubeBasis& basis, const Driver& driver,
                                  const Obstacle& obstacle, const Thresholds& thresholds, const TimeGrid& grid,
                                  double n) {
    return detail::BackwardEngine::run(cloud, basis, basis, driver, terminal_of(obstacle, grid), thresholds, grid,
                                       {Method::penalization, &obstacle, n});
}

ReflectedSolution solve_regularized(const PathCloud& cloud, const HypercubeBasis& basis, const Driver& driver,
                                    const Obstacle& obstacle, const Thresholds& thresholds, const TimeGrid& grid,
                                    double n) {
    return detail::BackwardEngine::run(cloud, basis, basis, driver, terminal_of(obstacle, grid), thresholds, grid,
                                       {Method::regularization, &obstacle, n});
}

double mollifier(double u, double n) {
    const double a = std::abs(u) * n;
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    return 2.0 - a;
}

double binomial_american_put(double rate, double volatility, double strike, double spot, double maturity,
                             std::size_t steps) {
    if (steps == 0) throw std::invalid_argument("binomial_american_put: steps must be >= 1");
    if (!(spot > 0.0) || !(strike >= 0.0)) throw std::invalid_argument("binomial_american_put: bad spot/strike");
    if (!(maturity > 0.0)) return std::max(strike - spot, 0.0);

    const double dt = maturity / static_cast<double>(steps);
    const double discount = std::exp(-rate * dt);
    double up, down, p_up;
    if (volatility > 0.0) {
        up = std::exp(volatility * std::sqrt(dt));
        down = 1.0 / up;
        p_up = (std::exp(rate * dt) - down) / (up - down);
    } else {
        // Deterministic tree: the single branch grows at the riskless rate.
        up = down = std::exp(rate * dt);
        p_up = 1.0;
    }
    if (!(p_up >= 0.0 && p_up <= 1.0))
        throw std::invalid_argument("binomial_american_put: tree is not arbitrage-free for these steps");

    // values[j]: node with j down-moves.
    std::vector<double> values(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) {
        const double s = spot * std::pow(up, static_cast<double>(steps - j)) * std::pow(down, static_cast<double>(j));
        values[j] = std::max(strike - s, 0.0);
    }
    for (std::size_t i = steps; i-- > 0;) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double s = spot * std::pow(up, static_cast<double>(i - j)) * std::pow(down, static_cast<double>(j));
            const double cont = discount * (p_up * values[j] + (1.0 - p_up) * values[j + 1]);
            values[j] = std::max(cont, strike - s);
        }
    }
    return values[0];
}

}  // namespace bsde
