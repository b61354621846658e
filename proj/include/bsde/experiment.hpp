#pragma once

#include "bsde/backward.hpp"
#include "bsde/models.hpp"
#include "bsde/simulation.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bsde {

enum class ModelKind { black_scholes, brownian };
enum class TerminalKind { geometric_put, product_exchange, identity, constant };
enum class DriverKind { linear, zero };

/// Parsed experiment description. See README.md for the file format.
struct ExperimentConfig {
    // [model]
    ModelKind model = ModelKind::black_scholes;
    std::size_t dimension = 1;
    BlackScholesSpec black_scholes;
    std::vector<double> drift;         // brownian
    std::vector<double> volatilities;  // brownian
    std::vector<double> start;         // brownian
    // [payoff]
    TerminalKind payoff = TerminalKind::geometric_put;
    double strike = 0.0;
    double constant = 0.0;
    // [driver]
    DriverKind driver = DriverKind::linear;
    double driver_rate = 0.0;
    // [solver]
    Method method = Method::plain;
    double penalty = 0.0;
    // [grid]
    double maturity = 0.0;
    std::size_t steps = 0;
    // [basis]
    int degree = 0;
    std::vector<double> center;
    std::vector<double> half_width;
    double width_sds = 4.0;
    std::vector<double> edge;
    // [thresholds]
    double increment_bound = 5.0;
    std::vector<double> state_bounds;
    std::optional<double> clamp_override;
    // [run]
    std::size_t paths = 0;
    std::uint64_t seed = 1;
    std::size_t replications = 1;
    // [sweep]
    std::vector<std::size_t> sweep_steps;
    std::vector<std::size_t> sweep_paths;
    std::vector<double> sweep_edge;
    std::vector<double> sweep_penalty;
};

/// Parses the sectioned key = value format and validates it. Throws
/// ConfigError naming the offending field.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

struct SweepPoint {
    std::size_t steps;
    std::size_t paths;
    double edge;
    double penalty;
};

/// Cartesian product of the sweep lists (steps, paths, edge, penalty; last
/// fastest). Missing lists contribute the base value.
std::vector<SweepPoint> sweep_points(const ExperimentConfig& config);

/// Everything a solver needs for one sweep point.
struct Problem {
    ForwardModel model;
    TimeGrid grid;
    HypercubeBasis basis;
    Driver driver;
    TerminalCondition terminal;
    Obstacle obstacle;
    Thresholds thresholds;
    Method method;
    double penalty;
};

Problem build_problem(const ExperimentConfig& config, const SweepPoint& point);

/// Simulates the paths for `seed` (plus shadow steps for plain_modified)
/// and runs the configured solver.
BackwardSolution solve_problem(const Problem& problem, std::size_t paths, std::uint64_t seed);

/// Seed of the shadow streams used with `seed` by the modified algorithm.
std::uint64_t shadow_seed_for(std::uint64_t seed);

struct ResultRow {
    std::size_t point_index;
    SweepPoint point;
    std::size_t replication;
    std::uint64_t seed;
    double y0;
    std::vector<double> z0;
    double y0_standard_error;
    double seconds;
};

/// Runs every sweep point `replications` times with seeds seed, seed+1, ...
/// Rows come back in (point, replication) order; the standard error is that
/// of the mean over replications of the row's point.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, std::ostream* summary);

void write_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<ResultRow>& rows);

/// Terminal states and all Brownian increments, one row per path:
/// path, xT_1..xT_d, dW_0_1..dW_0_q, ..., dW_{N-1}_1..dW_{N-1}_q.
void write_paths_csv(std::ostream& out, const PathCloud& cloud);

/// Shortest round-trip decimal with 17 significant digits, C locale.
std::string format_double(double v);

}  // namespace bsde
