#pragma once

#include "bsde/backward.hpp"

namespace bsde {

/// Reflected solutions share the layout of BackwardSolution; method() tells
/// them apart and v() is populated for the regularization method.
using ReflectedSolution = BackwardSolution;

/// Max method: the plain recursion with y_k(x) = max(phi^R(t_k, x), [alpha_{0,k} . p(x)]_y).
/// The maximum is taken at evaluation time, outside the clamp.
ReflectedSolution solve_max(const PathCloud& cloud, const HypercubeBasis& basis, const Driver& driver,
                            const Obstacle& obstacle, const Thresholds& thresholds, const TimeGrid& grid);

/// Penalization: y-targets gain n h (y_{k+1}(X_{k+1}) - phi^R(t_k, X_k))_-.
/// n = 0 reproduces solve_backward_initial exactly. Adds a warning when n h >= 1.
ReflectedSolution solve_penalized(const PathCloud& cloud, const HypercubeBasis& basis, const Driver& driver,
                                  const Obstacle& obstacle, const Thresholds& thresholds, const TimeGrid& grid,
                                  double n);

/// Regularization: additionally regresses V_{l,k} on phi^R(t_{k+1}, X_{k+1}) [dW_l]_w / h
/// and adds to the y-target
///   h phi_n(y_{k+1} - phi^R(t_{k+1}, X_{k+1}))
///     [f^R(t_k, X_k, phi^R(t_{k+1}, X_{k+1}), V_k(X_k)) + (phi^R(t_{k+1}, X_{k+1}) - phi^R(t_k, X_k)) / h]_-.
/// Requires n >= 1.
ReflectedSolution solve_regularized(const PathCloud& cloud, const HypercubeBasis& basis, const Driver& driver,
                                    const Obstacle& obstacle, const Thresholds& thresholds, const TimeGrid& grid,
                                    double n);

/// Piecewise-linear mollifier: 1 on |u| <= 1/n, 0 on |u| >= 2/n, linear between.
double mollifier(double u, double n);

/// Cox-Ross-Rubinstein price of an American put. Requires steps >= 1
/// (>= 100 for oracle use).
double binomial_american_put(double rate, double volatility, double strike, double spot, double maturity,
                             std::size_t steps);

}  // namespace bsde
