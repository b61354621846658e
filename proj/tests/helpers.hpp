#pragma once

#include "bsde/forward_model.hpp"
#include "bsde/problem.hpp"

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace bsde::testing {

/// dX = drift dt + vol dW on R^d with independent components.
inline ForwardModel arithmetic_brownian(std::vector<double> start, double drift, double vol) {
    ForwardModel model;
    model.dimension = start.size();
    model.brownian_dimension = start.size();
    model.initial_state = std::move(start);
    model.drift = [drift](double, std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = drift;
    };
    model.diffusion = [vol](double, std::span<const double> x, std::span<double> out) {
        const std::size_t d = x.size();
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) out[i * d + j] = i == j ? vol : 0.0;
    };
    return model;
}

inline Driver zero_driver() {
    return {[](double, std::span<const double>, double, std::span<const double>) { return 0.0; }, 1e-8, 0.0};
}

inline TerminalCondition constant_terminal(double c) {
    return {[c](std::span<const double>) { return c; }, std::abs(c)};
}

struct Moments {
    double mean;
    double standard_error;
};

inline Moments moments(std::span<const double> v) {
    const auto n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace bsde::testing
