// Experiment runner: reads a sectioned key = value config, runs the sweep and
// writes one CSV row per replication.
//
//   bsde_cli run  --config <path> --out <path> [--seed <u64>] [--threads <n>]
//   bsde_cli dump --config <path> --out <path> [--seed <u64>] [--threads <n>]

#include "bsde/errors.hpp"
#include "bsde/experiment.hpp"
#include "bsde/parallel.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kNumericalFailure = 1;
constexpr int kConfigFailure = 2;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

void add_common(CLI::App& cmd, Options& opts) {
    cmd.add_option("--config", opts.config, "Experiment config file")->required();
    cmd.add_option("--out", opts.out, "Output CSV path")->required();
    cmd.add_option("--seed", opts.seed, "Override [run] seed");
    cmd.add_option("--threads", opts.threads, "Worker threads (speed only; results do not change)");
}

bsde::ExperimentConfig prepare(const Options& opts) {
    bsde::ExperimentConfig config = bsde::load_config(opts.config);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.threads) bsde::set_thread_count(*opts.threads);
    // Surface every configuration problem before any output is created.
    for (const auto& point : bsde::sweep_points(config)) (void)bsde::build_problem(config, point);
    return config;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw bsde::ConfigError("--out", "cannot open '" + path + "' for writing");
    return out;
}

int run(const Options& opts) {
    const bsde::ExperimentConfig config = prepare(opts);
    const auto rows = bsde::run_experiment(config, &std::cout);
    auto out = open_output(opts.out);
    bsde::write_csv(out, config, rows);
    return 0;
}

int dump(const Options& opts) {
    const bsde::ExperimentConfig config = prepare(opts);
    const auto point = bsde::sweep_points(config).front();
    const bsde::Problem problem = bsde::build_problem(config, point);
    const bsde::PathCloud cloud = bsde::simulate_paths(problem.model, problem.grid, point.paths, config.seed);
    auto out = open_output(opts.out);
    bsde::write_paths_csv(out, cloud);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regression Monte Carlo solver for (reflected) BSDEs"};
    app.require_subcommand(1);
    Options opts;
    auto* run_cmd = app.add_subcommand("run", "Run the configured sweep and write result rows as CSV");
    add_common(*run_cmd, opts);
    auto* dump_cmd = app.add_subcommand("dump", "Write terminal states and Brownian increments as CSV");
    add_common(*dump_cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigFailure;
    }

    try {
        if (run_cmd->parsed()) return run(opts);
        return dump(opts);
    } catch (const bsde::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const bsde::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid setup: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalFailure;
    }
}
