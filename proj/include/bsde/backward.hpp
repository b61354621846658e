#pragma once

#include "bsde/basis.hpp"
#include "bsde/problem.hpp"
#include "bsde/simulation.hpp"
#include "bsde/time_grid.hpp"
#include "bsde/truncation.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bsde {

enum class Method { plain, plain_modified, max, penalization, regularization };

std::string_view to_string(Method method);

namespace detail {
class BackwardEngine;
}

/// Output of a backward regression solver: for every step k the fitted
/// coefficients of y_k and z_{l,k}, evaluable as truncated functions.
///
/// y_k(x) = [alpha_{0,k} . p(x)]_y          (max method: max(phi^R(t_k, x), that))
/// z_{l,k}(x) = [alpha_{l,k} . p(x)]_z
/// y_N = phi^R exactly.
class BackwardSolution {
public:
    Method method() const noexcept { return method_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t brownian_dimension() const noexcept { return q_; }
    const HypercubeBasis& basis_y() const noexcept { return basis_y_; }
    const HypercubeBasis& basis_z() const noexcept { return basis_z_; }

    /// C_y and how it was obtained.
    const ClampLevel& clamp_level() const noexcept { return clamp_; }
    /// Effective bound on |y_k|: C_y, extended to sup|phi^R| for the max method.
    double y_bound() const noexcept { return y_bound_; }
    /// C_y / sqrt(h), the bound on |z| and |v|.
    double z_bound() const noexcept { return z_bound_; }

    double y(std::size_t k, std::span<const double> x) const;
    double z(std::size_t k, std::size_t l, std::span<const double> x) const;
    /// Regression of phi^R(t_{k+1}, X_{k+1}) dW_l / h (regularization method only).
    double v(std::size_t k, std::size_t l, std::span<const double> x) const;

    const CoefficientVector& y_coefficients(std::size_t k) const { return y_coeffs_.at(k); }
    const CoefficientVector& z_coefficients(std::size_t k, std::size_t l) const { return z_coeffs_.at(k * q_ + l); }

    /// y_0(x_0) and z_0(x_0).
    double y0() const noexcept { return y0_; }
    std::span<const double> z0() const noexcept { return z0_; }

    std::span<const std::string> warnings() const noexcept { return warnings_; }

private:
    friend class detail::BackwardEngine;

    BackwardSolution(Method method, TimeGrid grid, HypercubeBasis basis_y, HypercubeBasis basis_z);

    Method method_;
    TimeGrid grid_;
    HypercubeBasis basis_y_;
    HypercubeBasis basis_z_;
    std::size_t q_ = 1;
    ClampLevel clamp_;
    double y_bound_ = 0.0;
    double z_bound_ = 0.0;
    std::function<double(std::span<const double>)> terminal_;          // phi^R
    std::function<double(double, std::span<const double>)> floor_;     // obstacle (max method)
    std::vector<CoefficientVector> y_coeffs_;                          // k = 0..N-1
    std::vector<CoefficientVector> z_coeffs_;                          // (k, l)
    std::vector<CoefficientVector> v_coeffs_;                          // (k, l), regularization
    double y0_ = 0.0;
    std::vector<double> z0_;
    std::vector<std::string> warnings_;
};

/// Regression scheme on one cloud of paths. Step k, for l = 1..q:
///   alpha_{l,k} = argmin (1/M) sum_m |y_{k+1}(X^m_{k+1}) [dW^m_{l,k}]_w / h - alpha . p(X^m_k)|^2
/// then
///   alpha_{0,k} = argmin (1/M) sum_m |y_{k+1}(X^m_{k+1})
///                   + h f^R(t_k, X^m_k, y_{k+1}(X^m_{k+1}), z_k(X^m_k)) - alpha . p(X^m_k)|^2.
/// Throws NumericalError on a non-finite regression target.
BackwardSolution solve_backward_initial(const PathCloud& cloud, const HypercubeBasis& basis_y,
                                        const HypercubeBasis& basis_z, const Driver& driver,
                                        const TerminalCondition& terminal, const Thresholds& thresholds,
                                        const TimeGrid& grid);

/// Same recursion, but inside the regression targets X_{k+1} and dW_k are
/// replaced by the shadow copies drawn conditionally on X_k. Requires a
/// cloud produced by simulate_shadow_steps.
BackwardSolution solve_backward_modified(const PathCloud& cloud, const HypercubeBasis& basis_y,
                                         const HypercubeBasis& basis_z, const Driver& driver,
                                         const TerminalCondition& terminal, const Thresholds& thresholds,
                                         const TimeGrid& grid);

}  // namespace bsde
