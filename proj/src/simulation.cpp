#include "bsde/simulation.hpp"

#include "bsde/errors.hpp"
#include "bsde/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bsde {

void ForwardModel::validate() const {
    if (dimension == 0) throw std::invalid_argument("ForwardModel: dimension must be >= 1");
    if (brownian_dimension == 0)
        throw std::invalid_argument("ForwardModel: brownian dimension must be >= 1");
    if (initial_state.size() != dimension)
        throw std::invalid_argument("ForwardModel: initial state has wrong length");
    if (!drift || !diffusion) throw std::invalid_argument("ForwardModel: drift and diffusion required");
    if (jumps) {
        if (!(jumps->intensity >= 0.0) || !std::isfinite(jumps->intensity))
            throw std::invalid_argument("ForwardModel: jump intensity must be finite and >= 0");
        if (jumps->intensity > 0.0 && (!jumps->sample_mark || !jumps->coefficient))
            throw std::invalid_argument("ForwardModel: jump part needs a mark sampler and coefficient");
    }
}

std::span<const double> PathCloud::state(std::size_t m, std::size_t k) const {
    return {states_.data() + (k * paths_ + m) * dimension_, dimension_};
}

std::span<const double> PathCloud::increment(std::size_t m, std::size_t k) const {
    return {increments_.data() + (k * paths_ + m) * brownian_dimension_, brownian_dimension_};
}

std::span<const double> PathCloud::shadow_state(std::size_t m, std::size_t k) const {
    if (!has_shadow()) throw std::logic_error("PathCloud: no shadow arrays");
    return {shadow_states_.data() + (k * paths_ + m) * dimension_, dimension_};
}

std::span<const double> PathCloud::shadow_increment(std::size_t m, std::size_t k) const {
    if (!has_shadow()) throw std::logic_error("PathCloud: no shadow arrays");
    return {shadow_increments_.data() + (k * paths_ + m) * brownian_dimension_, brownian_dimension_};
}

std::span<const double> PathCloud::states_at(std::size_t k) const {
    return {states_.data() + k * paths_ * dimension_, paths_ * dimension_};
}

std::span<const double> PathCloud::increments_at(std::size_t k) const {
    return {increments_.data() + k * paths_ * brownian_dimension_, paths_ * brownian_dimension_};
}

std::span<const double> PathCloud::shadow_states_at(std::size_t k) const {
    if (!has_shadow()) throw std::logic_error("PathCloud: no shadow arrays");
    return {shadow_states_.data() + k * paths_ * dimension_, paths_ * dimension_};
}

std::span<const double> PathCloud::shadow_increments_at(std::size_t k) const {
    if (!has_shadow()) throw std::logic_error("PathCloud: no shadow arrays");
    return {shadow_increments_.data() + k * paths_ * brownian_dimension_,
            paths_ * brownian_dimension_};
}

void euler_step(const ForwardModel& model, double t, double h, std::span<const double> x,
                RandomStream& stream, std::span<double> dw, std::span<double> next) {
    const std::size_t d = model.dimension;
    const std::size_t q = model.brownian_dimension;
    thread_local std::vector<double> drift, sigma, jump, mark;
    drift.assign(d, 0.0);
    sigma.assign(d * q, 0.0);

    const double sqrt_h = std::sqrt(h);
    for (std::size_t l = 0; l < q; ++l) dw[l] = sqrt_h * stream.normal();

    model.drift(t, x, drift);
    model.diffusion(t, x, sigma);
    for (std::size_t i = 0; i < d; ++i) {
        double v = x[i] + drift[i] * h;
        for (std::size_t l = 0; l < q; ++l) v += sigma[i * q + l] * dw[l];
        next[i] = v;
    }

    if (model.has_jumps()) {
        const JumpComponent& jp = *model.jumps;
        jump.assign(d, 0.0);
        mark.assign(jp.mark_dimension, 0.0);
        const std::uint32_t count = stream.poisson(jp.intensity * h);
        for (std::uint32_t j = 0; j < count; ++j) {
            jp.sample_mark(stream, mark);
            jp.coefficient(t, x, mark, jump);
            for (std::size_t i = 0; i < d; ++i) next[i] += jump[i];
        }
        if (jp.compensator) {
            jp.compensator(t, x, jump);
            for (std::size_t i = 0; i < d; ++i) next[i] -= h * jump[i];
        }
    }
}

namespace {

void check_finite(std::span<const double> x, std::size_t m, std::size_t k, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw NumericalError(std::string(what) + ": non-finite state on path " + std::to_string(m) +
                                     " at step " + std::to_string(k),
                                 k, m);
        }
    }
}

}  // namespace

PathCloud simulate_paths(const ForwardModel& model, const TimeGrid& grid, std::size_t paths,
                         std::uint64_t seed) {
    model.validate();
    if (paths == 0) throw std::invalid_argument("simulate_paths: need at least one path");

    PathCloud cloud;
    cloud.paths_ = paths;
    cloud.steps_ = grid.steps();
    cloud.dimension_ = model.dimension;
    cloud.brownian_dimension_ = model.brownian_dimension;
    cloud.seed_ = seed;
    const std::size_t d = model.dimension;
    const std::size_t q = model.brownian_dimension;
    const std::size_t n = grid.steps();
    cloud.states_.resize((n + 1) * paths * d);
    cloud.increments_.resize(n * paths * q);

    const double h = grid.step();
    parallel_for(paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            double* x0 = cloud.states_.data() + m * d;
            std::copy(model.initial_state.begin(), model.initial_state.end(), x0);
            for (std::size_t k = 0; k < n; ++k) {
                RandomStream stream(seed, m, static_cast<std::uint32_t>(k));
                std::span<const double> x{cloud.states_.data() + (k * paths + m) * d, d};
                std::span<double> next{cloud.states_.data() + ((k + 1) * paths + m) * d, d};
                std::span<double> dw{cloud.increments_.data() + (k * paths + m) * q, q};
                euler_step(model, grid.time(k), h, x, stream, dw, next);
                check_finite(next, m, k + 1, "simulate_paths");
            }
        }
    });
    return cloud;
}

PathCloud simulate_shadow_steps(PathCloud cloud, const ForwardModel& model, const TimeGrid& grid,
                                std::uint64_t shadow_seed) {
    model.validate();
    if (cloud.has_shadow()) throw std::invalid_argument("simulate_shadow_steps: shadow arrays already present");
    if (shadow_seed == cloud.seed())
        throw std::invalid_argument("simulate_shadow_steps: shadow seed must differ from the path seed");
    if (cloud.steps() != grid.steps() || cloud.dimension() != model.dimension ||
        cloud.brownian_dimension() != model.brownian_dimension)
        throw std::invalid_argument("simulate_shadow_steps: cloud does not match model/grid");

    const std::size_t paths = cloud.paths();
    const std::size_t d = cloud.dimension();
    const std::size_t q = cloud.brownian_dimension();
    const std::size_t n = cloud.steps();
    cloud.shadow_states_.resize(n * paths * d);
    cloud.shadow_increments_.resize(n * paths * q);

    const double h = grid.step();
    parallel_for(paths, [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            for (std::size_t k = 0; k < n; ++k) {
                RandomStream stream(shadow_seed, m, static_cast<std::uint32_t>(k));
                std::span<const double> x = cloud.state(m, k);
                std::span<double> next{cloud.shadow_states_.data() + (k * paths + m) * d, d};
                std::span<double> dw{cloud.shadow_increments_.data() + (k * paths + m) * q, q};
                euler_step(model, grid.time(k), h, x, stream, dw, next);
                check_finite(next, m, k + 1, "simulate_shadow_steps");
            }
        }
    });
    cloud.shadow_seed_ = shadow_seed;
    return cloud;
}

}  // namespace bsde
