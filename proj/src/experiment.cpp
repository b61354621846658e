#include "bsde/experiment.hpp"

#include "bsde/errors.hpp"
#include "bsde/reflected.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bsde {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

using Entries = std::map<std::string, std::string>;

Entries read_entries(std::istream& in) {
    Entries entries;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigError("line " + std::to_string(line_no), "unterminated section header");
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        if (section.empty()) throw ConfigError("line " + std::to_string(line_no), "key outside any section");
        const std::string key = section + "." + trim(std::string_view(text).substr(0, eq));
        if (entries.count(key)) throw ConfigError(key, "duplicate key");
        entries[key] = trim(std::string_view(text).substr(eq + 1));
    }
    return entries;
}

class Reader {
public:
    explicit Reader(Entries entries) : entries_(std::move(entries)) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string text(const std::string& key) {
        used_.push_back(key);
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError(key, "missing required field");
        return it->second;
    }

    double number(const std::string& key) { return parse_number(key, text(key)); }

    double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::size_t count(const std::string& key) {
        const double v = number(key);
        if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) throw ConfigError(key, "expected a non-negative integer");
        return static_cast<std::size_t>(v);
    }

    std::vector<double> list(const std::string& key) {
        std::vector<double> out;
        std::stringstream ss(text(key));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
        if (out.empty()) throw ConfigError(key, "empty list");
        return out;
    }

    std::vector<double> list_or_empty(const std::string& key) { return has(key) ? list(key) : std::vector<double>{}; }

    std::vector<std::size_t> count_list(const std::string& key) {
        std::vector<std::size_t> out;
        for (double v : list(key)) {
            if (!(v >= 1.0) || v != std::floor(v) || v > 9.0e15) throw ConfigError(key, "expected positive integers");
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : entries_)
            if (std::find(used_.begin(), used_.end(), key) == used_.end()) throw ConfigError(key, "unknown field");
    }

private:
    static double parse_number(const std::string& key, const std::string& s) {
        double v = 0.0;
        const auto* begin = s.data();
        const auto* end = s.data() + s.size();
        const auto res = std::from_chars(begin, end, v);
        if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
            throw ConfigError(key, "not a finite number: '" + s + "'");
        return v;
    }

    Entries entries_;
    std::vector<std::string> used_;
};

std::vector<double> broadcast(std::vector<double> v, std::size_t d, const std::string& key) {
    if (v.size() == 1 && d > 1) v.assign(d, v[0]);
    if (v.size() != d) throw ConfigError(key, "expected 1 or " + std::to_string(d) + " values");
    return v;
}

template <class Enum>
Enum choose(const std::string& key, const std::string& value, std::initializer_list<std::pair<const char*, Enum>> options) {
    std::string names;
    for (const auto& [name, e] : options) {
        if (value == name) return e;
        names += names.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(key, "expected one of {" + names + "}, got '" + value + "'");
}

void validate(const ExperimentConfig& c) {
    if (c.payoff == TerminalKind::product_exchange && c.dimension % 2 != 0)
        throw ConfigError("payoff.kind", "product_exchange needs an even dimension");
    if (c.method == Method::regularization && c.sweep_penalty.empty() && c.penalty < 1.0)
        throw ConfigError("solver.penalty", "regularization needs n >= 1");
    for (double n : c.sweep_penalty) {
        if (n < 0.0) throw ConfigError("sweep.penalty", "must be >= 0");
        if (c.method == Method::regularization && n < 1.0) throw ConfigError("sweep.penalty", "regularization needs n >= 1");
    }
    for (double e : c.sweep_edge)
        if (!(e > 0.0)) throw ConfigError("sweep.edge", "must be positive");
    if (c.model == ModelKind::black_scholes) {
        for (double v : c.black_scholes.volatilities)
            if (!(v >= 0.0)) throw ConfigError("model.volatilities", "must be >= 0");
        for (double s : c.black_scholes.spots)
            if (!(s > 0.0)) throw ConfigError("model.spots", "must be positive");
    }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    Reader r(read_entries(in));
    ExperimentConfig c;

    c.model = choose<ModelKind>("model.kind", r.text("model.kind"),
                                {{"black_scholes", ModelKind::black_scholes}, {"brownian", ModelKind::brownian}});
    c.dimension = r.count("model.dimension");
    if (c.dimension == 0) throw ConfigError("model.dimension", "must be >= 1");
    const std::size_t d = c.dimension;
    if (c.model == ModelKind::black_scholes) {
        c.black_scholes.rate = r.number("model.rate");
        c.black_scholes.dividends = r.has("model.dividends") ? broadcast(r.list("model.dividends"), d, "model.dividends")
                                                             : std::vector<double>(d, 0.0);
        c.black_scholes.volatilities = broadcast(r.list("model.volatilities"), d, "model.volatilities");
        c.black_scholes.spots = broadcast(r.list("model.spots"), d, "model.spots");
        if (r.has("model.correlation")) {
            c.black_scholes.correlation = r.list("model.correlation");
            if (c.black_scholes.correlation.size() != d * d) throw ConfigError("model.correlation", "expected d*d values");
        }
    } else {
        c.drift = r.has("model.drift") ? broadcast(r.list("model.drift"), d, "model.drift") : std::vector<double>(d, 0.0);
        c.volatilities = broadcast(r.list("model.volatilities"), d, "model.volatilities");
        c.start = r.has("model.start") ? broadcast(r.list("model.start"), d, "model.start") : std::vector<double>(d, 0.0);
    }

    c.payoff = choose<TerminalKind>("payoff.kind", r.text("payoff.kind"),
                                    {{"geometric_put", TerminalKind::geometric_put},
                                     {"product_exchange", TerminalKind::product_exchange},
                                     {"identity", TerminalKind::identity},
                                     {"constant", TerminalKind::constant}});
    if (c.payoff == TerminalKind::geometric_put) c.strike = r.number("payoff.strike");
    if (c.payoff == TerminalKind::constant) c.constant = r.number("payoff.value");
    if ((c.payoff == TerminalKind::geometric_put || c.payoff == TerminalKind::product_exchange) &&
        c.model != ModelKind::black_scholes)
        throw ConfigError("payoff.kind", "price payoffs need model.kind = black_scholes");

    const double default_rate = c.model == ModelKind::black_scholes ? c.black_scholes.rate : 0.0;
    c.driver = r.has("driver.kind")
                   ? choose<DriverKind>("driver.kind", r.text("driver.kind"),
                                        {{"linear", DriverKind::linear}, {"zero", DriverKind::zero}})
                   : DriverKind::linear;
    c.driver_rate = r.number_or("driver.rate", default_rate);

    c.method = choose<Method>("solver.method", r.text("solver.method"),
                              {{"plain", Method::plain},
                               {"plain_modified", Method::plain_modified},
                               {"max", Method::max},
                               {"penalization", Method::penalization},
                               {"regularization", Method::regularization}});
    c.penalty = r.number_or("solver.penalty", 0.0);
    if (c.penalty < 0.0) throw ConfigError("solver.penalty", "must be >= 0");

    c.maturity = r.number("grid.maturity");
    if (!(c.maturity > 0.0)) throw ConfigError("grid.maturity", "must be positive");
    c.steps = r.count("grid.steps");
    if (c.steps == 0) throw ConfigError("grid.steps", "must be >= 1");

    const double degree = r.number_or("basis.degree", 0.0);
    if (degree != 0.0 && degree != 1.0) throw ConfigError("basis.degree", "must be 0 or 1");
    c.degree = static_cast<int>(degree);
    c.edge = broadcast(r.list("basis.edge"), d, "basis.edge");
    for (double e : c.edge)
        if (!(e > 0.0)) throw ConfigError("basis.edge", "must be positive");
    c.center = r.has("basis.center") ? broadcast(r.list("basis.center"), d, "basis.center") : std::vector<double>{};
    c.half_width = r.has("basis.half_width") ? broadcast(r.list("basis.half_width"), d, "basis.half_width")
                                             : std::vector<double>{};
    for (double a : c.half_width)
        if (!(a > 0.0)) throw ConfigError("basis.half_width", "must be positive");
    c.width_sds = r.number_or("basis.width_sds", 4.0);
    if (!(c.width_sds > 0.0)) throw ConfigError("basis.width_sds", "must be positive");

    c.increment_bound = r.number_or("thresholds.r0", 5.0);
    if (!(c.increment_bound > 0.0)) throw ConfigError("thresholds.r0", "must be positive");
    c.state_bounds = r.has("thresholds.state") ? broadcast(r.list("thresholds.state"), d, "thresholds.state")
                                               : std::vector<double>(d, 50.0);
    for (double b : c.state_bounds)
        if (!(b > 0.0)) throw ConfigError("thresholds.state", "must be positive");
    if (r.has("thresholds.cy")) {
        c.clamp_override = r.number("thresholds.cy");
        if (!(*c.clamp_override > 0.0)) throw ConfigError("thresholds.cy", "must be positive");
    }

    c.paths = r.count("run.paths");
    if (c.paths == 0) throw ConfigError("run.paths", "must be >= 1");
    if (r.has("run.seed")) {
        const double s = r.number("run.seed");
        if (!(s >= 0.0) || s != std::floor(s) || s > 9.0e15) throw ConfigError("run.seed", "expected a non-negative integer");
        c.seed = static_cast<std::uint64_t>(s);
    }
    c.replications = r.has("run.replications") ? r.count("run.replications") : 1;
    if (c.replications == 0) throw ConfigError("run.replications", "must be >= 1");

    if (r.has("sweep.steps")) c.sweep_steps = r.count_list("sweep.steps");
    if (r.has("sweep.paths")) c.sweep_paths = r.count_list("sweep.paths");
    c.sweep_edge = r.list_or_empty("sweep.edge");
    c.sweep_penalty = r.list_or_empty("sweep.penalty");

    r.reject_unknown();
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse_config(in);
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
    const auto steps = c.sweep_steps.empty() ? std::vector<std::size_t>{c.steps} : c.sweep_steps;
    const auto paths = c.sweep_paths.empty() ? std::vector<std::size_t>{c.paths} : c.sweep_paths;
    // NaN marks "keep the per-axis edges of [basis]".
    const auto edges = c.sweep_edge.empty() ? std::vector<double>{std::nan("")} : c.sweep_edge;
    const auto penalties = c.sweep_penalty.empty() ? std::vector<double>{c.penalty} : c.sweep_penalty;
    std::vector<SweepPoint> points;
    for (auto n : steps)
        for (auto m : paths)
            for (double e : edges)
                for (double p : penalties) points.push_back({n, m, e, p});
    return points;
}

Problem build_problem(const ExperimentConfig& c, const SweepPoint& point) {
    const std::size_t d = c.dimension;
    ForwardModel model;
    std::vector<double> spread(d);  // terminal standard deviation per axis
    if (c.model == ModelKind::black_scholes) {
        BlackScholesSpec spec = c.black_scholes;
        model = build_forward(spec);
        for (std::size_t i = 0; i < d; ++i) spread[i] = spec.volatilities[i] * std::sqrt(c.maturity);
    } else {
        model.dimension = d;
        model.brownian_dimension = d;
        model.initial_state = c.start;
        const auto drift = c.drift;
        const auto vol = c.volatilities;
        model.drift = [drift](double, std::span<const double>, std::span<double> out) {
            std::copy(drift.begin(), drift.end(), out.begin());
        };
        model.diffusion = [vol](double, std::span<const double>, std::span<double> out) {
            const std::size_t n = vol.size();
            std::fill(out.begin(), out.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) out[i * n + i] = vol[i];
        };
        for (std::size_t i = 0; i < d; ++i) spread[i] = std::abs(vol[i]) * std::sqrt(c.maturity);
    }

    std::vector<double> center = c.center.empty() ? model.initial_state : c.center;
    std::vector<double> half_width = c.half_width;
    if (half_width.empty()) {
        half_width.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            if (!(spread[i] > 0.0)) throw ConfigError("basis.half_width", "required when the terminal spread is zero");
            half_width[i] = c.width_sds * spread[i];
        }
    }
    std::vector<double> edge = std::isnan(point.edge) ? c.edge : std::vector<double>(d, point.edge);

    Thresholds thresholds{c.increment_bound, c.state_bounds, c.clamp_override};

    TerminalCondition terminal;
    switch (c.payoff) {
        case TerminalKind::geometric_put:
            terminal = make_terminal({PayoffKind::geometric_put, c.strike}, c.state_bounds);
            break;
        case TerminalKind::product_exchange:
            terminal = make_terminal({PayoffKind::product_exchange, 0.0}, c.state_bounds);
            break;
        case TerminalKind::identity:
            terminal = {[](std::span<const double> x) { return x[0]; }, c.state_bounds[0]};
            break;
        case TerminalKind::constant: {
            const double v = c.constant;
            terminal = {[v](std::span<const double>) { return v; }, std::abs(v)};
            break;
        }
    }
    auto phi = terminal.phi;
    Obstacle obstacle{[phi](double, std::span<const double> x) { return phi(x); }, terminal.sup_abs};

    Driver driver = c.driver == DriverKind::linear ? linear_pricing_driver(c.driver_rate)
                                                   : Driver{[](double, std::span<const double>, double, std::span<const double>) { return 0.0; },
                                                            1e-8, 0.0};

    return {std::move(model),
            TimeGrid(c.maturity, point.steps),
            HypercubeBasis(std::move(center), std::move(half_width), std::move(edge), c.degree),
            std::move(driver),
            std::move(terminal),
            std::move(obstacle),
            std::move(thresholds),
            c.method,
            point.penalty};
}

std::uint64_t shadow_seed_for(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

BackwardSolution solve_problem(const Problem& p, std::size_t paths, std::uint64_t seed) {
    PathCloud cloud = simulate_paths(p.model, p.grid, paths, seed);
    switch (p.method) {
        case Method::plain:
            return solve_backward_initial(cloud, p.basis, p.basis, p.driver, p.terminal, p.thresholds, p.grid);
        case Method::plain_modified:
            cloud = simulate_shadow_steps(std::move(cloud), p.model, p.grid, shadow_seed_for(seed));
            return solve_backward_modified(cloud, p.basis, p.basis, p.driver, p.terminal, p.thresholds, p.grid);
        case Method::max:
            return solve_max(cloud, p.basis, p.driver, p.obstacle, p.thresholds, p.grid);
        case Method::penalization:
            return solve_penalized(cloud, p.basis, p.driver, p.obstacle, p.thresholds, p.grid, p.penalty);
        case Method::regularization:
            return solve_regularized(cloud, p.basis, p.driver, p.obstacle, p.thresholds, p.grid, p.penalty);
    }
    throw std::logic_error("solve_problem: unknown method");
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, std::ostream* summary) {
    const auto points = sweep_points(config);
    std::vector<ResultRow> rows;
    if (summary) {
        *summary << std::left << std::setw(7) << "steps" << std::setw(10) << "paths" << std::setw(10) << "edge"
                 << std::setw(9) << "n" << std::setw(14) << "mean Y0" << std::setw(12) << "SE" << "seconds\n";
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Problem problem = build_problem(config, points[i]);
        const std::size_t first = rows.size();
        std::vector<std::string> warnings;
        for (std::size_t r = 0; r < config.replications; ++r) {
            const std::uint64_t seed = config.seed + r;
            const auto start = std::chrono::steady_clock::now();
            const BackwardSolution sol = solve_problem(problem, points[i].paths, seed);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            for (const auto& w : sol.warnings())
                if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
            rows.push_back({i, points[i], r, seed, sol.y0(), std::vector<double>(sol.z0().begin(), sol.z0().end()), 0.0, secs});
        }
        const auto n = static_cast<double>(config.replications);
        double mean = 0.0, secs = 0.0;
        for (std::size_t j = first; j < rows.size(); ++j) {
            mean += rows[j].y0 / n;
            secs += rows[j].seconds / n;
        }
        double se = 0.0;
        if (config.replications > 1) {
            double ss = 0.0;
            for (std::size_t j = first; j < rows.size(); ++j) ss += (rows[j].y0 - mean) * (rows[j].y0 - mean);
            se = std::sqrt(ss / (n - 1.0) / n);
        }
        for (std::size_t j = first; j < rows.size(); ++j) rows[j].y0_standard_error = se;
        if (summary) {
            std::ostringstream edge;
            if (std::isnan(points[i].edge)) edge << config.edge[0];
            else edge << points[i].edge;
            *summary << std::left << std::setw(7) << points[i].steps << std::setw(10) << points[i].paths
                     << std::setw(10) << edge.str() << std::setw(9) << points[i].penalty << std::setw(14)
                     << std::setprecision(8) << mean << std::setw(12) << std::setprecision(3) << se
                     << std::setprecision(3) << secs << "\n";
            for (const auto& w : warnings) *summary << "  warning: " << w << "\n";
        }
    }
    return rows;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<ResultRow>& rows) {
    const std::size_t q = config.dimension;
    out << "point,replication,seed,method,steps,paths,edge,penalty,y0";
    for (std::size_t l = 0; l < q; ++l) out << ",z0_" << (l + 1);
    out << ",y0_se,seconds\n";
    for (const auto& row : rows) {
        const double edge = std::isnan(row.point.edge) ? config.edge[0] : row.point.edge;
        out << row.point_index << ',' << row.replication << ',' << row.seed << ',' << to_string(config.method) << ','
            << row.point.steps << ',' << row.point.paths << ',' << format_double(edge) << ','
            << format_double(row.point.penalty) << ',' << format_double(row.y0);
        for (double z : row.z0) out << ',' << format_double(z);
        out << ',' << format_double(row.y0_standard_error) << ',' << format_double(row.seconds) << '\n';
    }
}

void write_paths_csv(std::ostream& out, const PathCloud& cloud) {
    const std::size_t d = cloud.dimension();
    const std::size_t q = cloud.brownian_dimension();
    const std::size_t n = cloud.steps();
    out << "path";
    for (std::size_t i = 0; i < d; ++i) out << ",xT_" << (i + 1);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < q; ++l) out << ",dW_" << k << '_' << (l + 1);
    out << '\n';
    for (std::size_t m = 0; m < cloud.paths(); ++m) {
        out << m;
        for (double x : cloud.state(m, n)) out << ',' << format_double(x);
        for (std::size_t k = 0; k < n; ++k)
            for (double w : cloud.increment(m, k)) out << ',' << format_double(w);
        out << '\n';
    }
}

}  // namespace bsde
