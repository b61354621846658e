#pragma once

#include <cstddef>
#include <stdexcept>

namespace bsde {

/// Uniform grid t_k = k h on [0, T] with h = T / N.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
        if (steps == 0) throw std::invalid_argument("TimeGrid: step count must be >= 1");
        if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        step_ = horizon / static_cast<double>(steps);
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    double step() const noexcept { return step_; }

    /// Node k; the last node is T exactly.
    double time(std::size_t k) const noexcept {
        return k >= steps_ ? horizon_ : static_cast<double>(k) * step_;
    }

private:
    double horizon_;
    std::size_t steps_;
    double step_;
};

}  // namespace bsde
