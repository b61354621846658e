#pragma once

#include "bsde/backward.hpp"

namespace bsde::detail {

struct Reflection {
    Method method = Method::plain;
    const Obstacle* obstacle = nullptr;
    double intensity = 0.0;  // penalty or mollifier parameter n
};

class BackwardEngine {
public:
    static BackwardSolution run(const PathCloud& cloud, const HypercubeBasis& basis_y,
                                const HypercubeBasis& basis_z, const Driver& driver,
                                const TerminalCondition& terminal, const Thresholds& thresholds,
                                const TimeGrid& grid, const Reflection& reflection);
};

}  // namespace bsde::detail
