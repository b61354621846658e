#pragma once

#include "bsde/forward_model.hpp"
#include "bsde/time_grid.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace bsde {

/// M simulated paths of the Euler chain together with their Brownian
/// increments, and optionally one conditionally independent re-simulated
/// step per (path, step) pair ("shadow" arrays).
///
/// Storage is step-major so that all paths at a given time are contiguous.
class PathCloud {
public:
    std::size_t paths() const noexcept { return paths_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t brownian_dimension() const noexcept { return brownian_dimension_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::optional<std::uint64_t> shadow_seed() const noexcept { return shadow_seed_; }
    bool has_shadow() const noexcept { return shadow_seed_.has_value(); }

    /// X[m][k], k = 0..N.
    std::span<const double> state(std::size_t m, std::size_t k) const;
    /// dW[m][k], k = 0..N-1.
    std::span<const double> increment(std::size_t m, std::size_t k) const;
    /// Shadow X~[m][k+1], drawn from X[m][k]; k = 0..N-1.
    std::span<const double> shadow_state(std::size_t m, std::size_t k) const;
    /// Shadow dW~[m][k]; k = 0..N-1.
    std::span<const double> shadow_increment(std::size_t m, std::size_t k) const;

    /// All M states at node k, flattened M x d.
    std::span<const double> states_at(std::size_t k) const;
    std::span<const double> increments_at(std::size_t k) const;
    std::span<const double> shadow_states_at(std::size_t k) const;
    std::span<const double> shadow_increments_at(std::size_t k) const;

private:
    friend PathCloud simulate_paths(const ForwardModel&, const TimeGrid&, std::size_t, std::uint64_t);
    friend PathCloud simulate_shadow_steps(PathCloud, const ForwardModel&, const TimeGrid&,
                                           std::uint64_t);

    std::size_t paths_ = 0;
    std::size_t steps_ = 0;
    std::size_t dimension_ = 0;
    std::size_t brownian_dimension_ = 0;
    std::uint64_t seed_ = 0;
    std::optional<std::uint64_t> shadow_seed_;
    std::vector<double> states_;           // (N+1) x M x d
    std::vector<double> increments_;       // N x M x q
    std::vector<double> shadow_states_;    // N x M x d
    std::vector<double> shadow_increments_;// N x M x q
};

/// One explicit Euler step from `x` at time `t`. Draws q normals, then (only
/// when the model has jumps) a Poisson jump count and the marks, all from
/// `stream`. Writes the scaled increment into `dw` and the new state into
/// `next`.
void euler_step(const ForwardModel& model, double t, double h, std::span<const double> x,
                RandomStream& stream, std::span<double> dw, std::span<double> next);

/// Simulates M i.i.d. Euler paths. Path m, step k uses the stream
/// (seed, m, k), so the output does not depend on the thread count.
/// Throws NumericalError on a non-finite state.
PathCloud simulate_paths(const ForwardModel& model, const TimeGrid& grid, std::size_t paths,
                         std::uint64_t seed);

/// Adds shadow arrays: for each (m, k) a fresh increment and one Euler step
/// from X[m][k], using streams (shadow_seed, m, k).
PathCloud simulate_shadow_steps(PathCloud cloud, const ForwardModel& model, const TimeGrid& grid,
                                std::uint64_t shadow_seed);

}  // namespace bsde
