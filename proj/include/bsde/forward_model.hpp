#pragma once

#include "bsde/random.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bsde {

/// Writes a d-vector (drift) or a row-major d x q matrix (diffusion) into `out`.
using StateFunction = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

/// Finite-activity (compound Poisson) jump part of the forward dynamics.
struct JumpComponent {
    /// Total mass of the Levy measure, in events per unit time.
    double intensity = 0.0;
    std::size_t mark_dimension = 1;
    std::function<void(RandomStream&, std::span<double> mark)> sample_mark;
    /// beta(t, x, e), a d-vector.
    std::function<void(double t, std::span<const double> x, std::span<const double> mark,
                       std::span<double> out)>
        coefficient;
    /// Optional Lambda * E[beta(t, x, .)]. When set, the Euler step subtracts
    /// h times this vector; when empty the drift is taken to absorb it.
    StateFunction compensator;
};

/// Coefficients of the forward SDE
///   dX = b(t, X) dt + sigma(t, X) dW + jumps,   X_0 = x0.
struct ForwardModel {
    std::size_t dimension = 1;
    std::size_t brownian_dimension = 1;
    std::vector<double> initial_state;
    StateFunction drift;
    StateFunction diffusion;
    std::optional<JumpComponent> jumps;

    bool has_jumps() const noexcept { return jumps.has_value() && jumps->intensity > 0.0; }

    /// Throws std::invalid_argument when shapes or parameters are inconsistent.
    void validate() const;
};

}  // namespace bsde
