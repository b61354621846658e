#include "bsde/backward.hpp"

#include "backward_engine.hpp"
#include "bsde/errors.hpp"
#include "bsde/parallel.hpp"
#include "bsde/reflected.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bsde {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::plain: return "plain";
        case Method::plain_modified: return "plain_modified";
        case Method::max: return "max";
        case Method::penalization: return "penalization";
        case Method::regularization: return "regularization";
    }
    return "unknown";
}

BackwardSolution::BackwardSolution(Method method, TimeGrid grid, HypercubeBasis basis_y, HypercubeBasis basis_z)
    : method_(method), grid_(grid), basis_y_(std::move(basis_y)), basis_z_(std::move(basis_z)) {}

double BackwardSolution::y(std::size_t k, std::span<const double> x) const {
    if (k > grid_.steps()) throw std::out_of_range("BackwardSolution::y: step out of range");
    if (k == grid_.steps()) return terminal_(x);
    const double continuation = clamp_symmetric(evaluate(basis_y_, y_coeffs_[k], x), clamp_.value);
    if (floor_) return std::max(floor_(grid_.time(k), x), continuation);
    return continuation;
}

double BackwardSolution::z(std::size_t k, std::size_t l, std::span<const double> x) const {
    if (k >= grid_.steps() || l >= q_) throw std::out_of_range("BackwardSolution::z: index out of range");
    return clamp_symmetric(evaluate(basis_z_, z_coeffs_[k * q_ + l], x), z_bound_);
}

double BackwardSolution::v(std::size_t k, std::size_t l, std::span<const double> x) const {
    if (v_coeffs_.empty()) throw std::logic_error("BackwardSolution::v: only available for regularization");
    if (k >= grid_.steps() || l >= q_) throw std::out_of_range("BackwardSolution::v: index out of range");
    return clamp_symmetric(evaluate(basis_z_, v_coeffs_[k * q_ + l], x), z_bound_);
}

namespace detail {

namespace {

void require_finite(double v, std::size_t k, std::size_t m, const char* what) {
    if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite " << what << " regression target at step " << k << ", path " << m;
        throw NumericalError(msg.str(), k, m);
    }
}

}  // namespace

BackwardSolution BackwardEngine::run(const PathCloud& cloud, const HypercubeBasis& basis_y,
                                     const HypercubeBasis& basis_z, const Driver& driver,
                                     const TerminalCondition& terminal, const Thresholds& thresholds,
                                     const TimeGrid& grid, const Reflection& reflection) {
    const std::size_t d = cloud.dimension();
    const std::size_t q = cloud.brownian_dimension();
    const std::size_t paths = cloud.paths();
    const std::size_t n_steps = grid.steps();
    const Method method = reflection.method;
    const bool use_shadow = method == Method::plain_modified;

    if (cloud.steps() != n_steps) throw std::invalid_argument("solver: cloud and grid step counts differ");
    if (basis_y.dimension() != d || basis_z.dimension() != d)
        throw std::invalid_argument("solver: basis dimension differs from state dimension");
    if (use_shadow && !cloud.has_shadow())
        throw std::invalid_argument("solver: modified algorithm needs shadow arrays");
    if (!driver.f) throw std::invalid_argument("solver: driver function missing");
    if (!terminal.phi) throw std::invalid_argument("solver: terminal function missing");
    thresholds.validate(d);
    const bool reflected = method == Method::max || method == Method::penalization ||
                           method == Method::regularization;
    if (reflected && (reflection.obstacle == nullptr || !reflection.obstacle->phi))
        throw std::invalid_argument("solver: reflected method needs an obstacle");
    if (reflection.intensity < 0.0) throw std::invalid_argument("solver: penalty/mollifier parameter must be >= 0");
    if (method == Method::regularization && reflection.intensity < 1.0)
        throw std::invalid_argument("solver: regularization needs n >= 1");

    BackwardSolution sol(method, grid, basis_y, basis_z);
    sol.q_ = q;
    sol.clamp_ = compute_cy(thresholds, driver, terminal, grid, q);
    if (!(sol.clamp_.value > 0.0))
        throw std::invalid_argument("solver: clamp level C_y is zero (terminal and driver vanish)");
    const double h = grid.step();
    const double sqrt_h = std::sqrt(h);
    const double cy = sol.clamp_.value;
    sol.y_bound_ = cy;
    sol.z_bound_ = cy / sqrt_h;
    if (sol.clamp_.estimated)
        sol.warnings_.emplace_back("sup-norms for C_y estimated on a grid; the clamp level is not rigorous");

    const std::vector<double> bounds = thresholds.state_bounds;
    sol.terminal_ = [terminal, bounds](std::span<const double> x) { return clamped_terminal(terminal, bounds, x); };

    const Obstacle* obstacle = reflection.obstacle;
    if (method == Method::max) {
        const Obstacle obs = *obstacle;
        sol.floor_ = [obs, bounds](double t, std::span<const double> x) { return clamped_obstacle(obs, bounds, t, x); };
        const double sup_obstacle = terminal.sup_abs.value_or(estimate_terminal_sup(terminal, bounds));
        if (sup_obstacle > cy) {
            sol.y_bound_ = sup_obstacle;
            sol.warnings_.emplace_back("obstacle exceeds C_y; y bound extended to sup|phi^R|");
        }
    }
    if (method == Method::penalization && reflection.intensity * h >= 1.0)
        sol.warnings_.emplace_back("penalty n*h >= 1: explicit penalization is stiff");

    sol.y_coeffs_.resize(n_steps);
    sol.z_coeffs_.resize(n_steps * q);
    if (method == Method::regularization) sol.v_coeffs_.resize(n_steps * q);

    std::vector<double> y_next(paths), targets(paths), z_values(paths * q), v_values;
    std::vector<double> obstacle_next;
    if (method == Method::regularization) {
        v_values.resize(paths * q);
        obstacle_next.resize(paths);
    }

    for (std::size_t k = n_steps; k-- > 0;) {
        const double t_k = grid.time(k);
        const double t_next = grid.time(k + 1);
        const auto xs = cloud.states_at(k);
        const auto next_xs = use_shadow ? cloud.shadow_states_at(k) : cloud.states_at(k + 1);
        const auto dws = use_shadow ? cloud.shadow_increments_at(k) : cloud.increments_at(k);

        parallel_for(paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t m = begin; m < end; ++m) y_next[m] = sol.y(k + 1, next_xs.subspan(m * d, d));
        });

        const RegressionDesign design_z(basis_z, xs);
        const bool shared = basis_y == basis_z;
        std::optional<RegressionDesign> own_design_y;
        if (!shared) own_design_y.emplace(basis_y, xs);
        const RegressionDesign& design_y = shared ? design_z : *own_design_y;

        for (std::size_t l = 0; l < q; ++l) {
            for (std::size_t m = 0; m < paths; ++m) {
                targets[m] = y_next[m] * clamp_increment(dws[m * q + l], thresholds.increment_bound, h) / h;
                require_finite(targets[m], k, m, "z");
            }
            sol.z_coeffs_[k * q + l] = design_z.fit(targets);
            const CoefficientVector& alpha = sol.z_coeffs_[k * q + l];
            parallel_for(paths, [&](std::size_t begin, std::size_t end) {
                for (std::size_t m = begin; m < end; ++m)
                    z_values[m * q + l] = clamp_symmetric(design_z.evaluate(alpha, m), sol.z_bound_);
            });
        }

        if (method == Method::regularization) {
            parallel_for(paths, [&](std::size_t begin, std::size_t end) {
                for (std::size_t m = begin; m < end; ++m)
                    obstacle_next[m] = clamped_obstacle(*obstacle, bounds, t_next, next_xs.subspan(m * d, d));
            });
            for (std::size_t l = 0; l < q; ++l) {
                for (std::size_t m = 0; m < paths; ++m) {
                    targets[m] = obstacle_next[m] * clamp_increment(dws[m * q + l], thresholds.increment_bound, h) / h;
                    require_finite(targets[m], k, m, "v");
                }
                sol.v_coeffs_[k * q + l] = design_z.fit(targets);
                const CoefficientVector& beta = sol.v_coeffs_[k * q + l];
                parallel_for(paths, [&](std::size_t begin, std::size_t end) {
                    for (std::size_t m = begin; m < end; ++m)
                        v_values[m * q + l] = clamp_symmetric(design_z.evaluate(beta, m), sol.z_bound_);
                });
            }
        }

        parallel_for(paths, [&](std::size_t begin, std::size_t end) {
            for (std::size_t m = begin; m < end; ++m) {
                const auto x = xs.subspan(m * d, d);
                const std::span<const double> z{z_values.data() + m * q, q};
                double target = y_next[m] + h * clamped_driver(driver, bounds, t_k, x, y_next[m], z);
                if (method == Method::penalization && reflection.intensity > 0.0) {
                    const double gap = y_next[m] - clamped_obstacle(*obstacle, bounds, t_k, x);
                    target += reflection.intensity * h * std::max(-gap, 0.0);
                } else if (method == Method::regularization) {
                    const double weight = mollifier(y_next[m] - obstacle_next[m], reflection.intensity);
                    if (weight > 0.0) {
                        const std::span<const double> v{v_values.data() + m * q, q};
                        const double drift = clamped_driver(driver, bounds, t_k, x, obstacle_next[m], v) +
                                             (obstacle_next[m] - clamped_obstacle(*obstacle, bounds, t_k, x)) / h;
                        target += h * weight * std::max(-drift, 0.0);
                    }
                }
                targets[m] = target;
            }
        });
        for (std::size_t m = 0; m < paths; ++m) require_finite(targets[m], k, m, "y");
        sol.y_coeffs_[k] = design_y.fit(targets);
    }

    const auto x0 = cloud.state(0, 0);
    sol.y0_ = sol.y(0, x0);
    sol.z0_.resize(q);
    for (std::size_t l = 0; l < q; ++l) sol.z0_[l] = sol.z(0, l, x0);
    return sol;
}

}  // namespace detail

BackwardSolution solve_backward_initial(const PathCloud& cloud, const HypercubeBasis& basis_y,
                                        const HypercubeBasis& basis_z, const Driver& driver,
                                        const TerminalCondition& terminal, const Thresholds& thresholds,
                                        const TimeGrid& grid) {
    return detail::BackwardEngine::run(cloud, basis_y, basis_z, driver, terminal, thresholds, grid,
                                       {Method::plain, nullptr, 0.0});
}

BackwardSolution solve_backward_modified(const PathCloud& cloud, const HypercubeBasis& basis_y,
                                         const HypercubeBasis& basis_z, const Driver& driver,
                                         const TerminalCondition& terminal, const Thresholds& thresholds,
                                         const TimeGrid& grid) {
    return detail::BackwardEngine::run(cloud, basis_y, basis_z, driver, terminal, thresholds, grid,
                                       {Method::plain_modified, nullptr, 0.0});
}

}  // namespace bsde
