#include "bsde/models.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bsde {

void BlackScholesSpec::validate() const {
    const std::size_t d = spots.size();
    if (d == 0) throw std::invalid_argument("BlackScholesSpec: no assets");
    if (dividends.size() != d || volatilities.size() != d)
        throw std::invalid_argument("BlackScholesSpec: dividends/volatilities must have one entry per asset");
    for (std::size_t i = 0; i < d; ++i) {
        if (!(spots[i] > 0.0)) throw std::invalid_argument("BlackScholesSpec: spots must be positive");
        if (!(volatilities[i] >= 0.0) || !std::isfinite(volatilities[i]))
            throw std::invalid_argument("BlackScholesSpec: volatilities must be finite and >= 0");
    }
    if (!correlation.empty() && correlation.size() != d * d)
        throw std::invalid_argument("BlackScholesSpec: correlation must be d x d");
}

std::vector<double> log_spots(const BlackScholesSpec& spec) {
    std::vector<double> x(spec.dimension());
    std::transform(spec.spots.begin(), spec.spots.end(), x.begin(), [](double s) { return std::log(s); });
    return x;
}

ForwardModel build_forward(const BlackScholesSpec& spec) {
    spec.validate();
    const std::size_t d = spec.dimension();

    std::vector<double> drift(d);
    for (std::size_t i = 0; i < d; ++i)
        drift[i] = spec.rate - spec.dividends[i] - 0.5 * spec.volatilities[i] * spec.volatilities[i];

    std::vector<double> sigma(d * d, 0.0);
    if (spec.correlation.empty()) {
        for (std::size_t i = 0; i < d; ++i) sigma[i * d + i] = spec.volatilities[i];
    } else {
        Eigen::MatrixXd corr(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) corr(i, j) = spec.correlation[i * d + j];
        Eigen::LLT<Eigen::MatrixXd> llt(corr);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("BlackScholesSpec: correlation is not positive definite");
        const Eigen::MatrixXd lower = llt.matrixL();
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) sigma[i * d + j] = spec.volatilities[i] * lower(i, j);
    }

    ForwardModel model;
    model.dimension = d;
    model.brownian_dimension = d;
    model.initial_state = log_spots(spec);
    model.drift = [drift](double, std::span<const double>, std::span<double> out) {
        std::copy(drift.begin(), drift.end(), out.begin());
    };
    model.diffusion = [sigma](double, std::span<const double>, std::span<double> out) {
        std::copy(sigma.begin(), sigma.end(), out.begin());
    };
    return model;
}

double payoff(const PayoffSpec& spec, std::span<const double> x) {
    switch (spec.kind) {
        case PayoffKind::geometric_put: {
            const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
            return std::max(spec.strike - std::exp(mean), 0.0);
        }
        case PayoffKind::product_exchange: {
            const std::size_t p = x.size() / 2;
            const double first = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p), 0.0);
            const double second = std::accumulate(x.begin() + static_cast<std::ptrdiff_t>(p), x.end(), 0.0);
            return std::max(std::exp(first) - std::exp(second), 0.0);
        }
    }
    return 0.0;
}

double payoff_sup(const PayoffSpec& spec, std::span<const double> bounds) {
    switch (spec.kind) {
        case PayoffKind::geometric_put: {
            const double mean = std::accumulate(bounds.begin(), bounds.end(), 0.0) / static_cast<double>(bounds.size());
            return std::max(spec.strike - std::exp(-mean), 0.0);
        }
        case PayoffKind::product_exchange: {
            const std::size_t p = bounds.size() / 2;
            const double first = std::accumulate(bounds.begin(), bounds.begin() + static_cast<std::ptrdiff_t>(p), 0.0);
            const double second = std::accumulate(bounds.begin() + static_cast<std::ptrdiff_t>(p), bounds.end(), 0.0);
            return std::exp(first) - std::exp(-second);
        }
    }
    return 0.0;
}

namespace {

void check_payoff_dimension(const PayoffSpec& spec, std::size_t d) {
    if (spec.kind == PayoffKind::product_exchange && (d < 2 || d % 2 != 0))
        throw std::invalid_argument("product_exchange payoff needs an even dimension");
}

}  // namespace

Obstacle make_obstacle(const PayoffSpec& spec, std::span<const double> bounds) {
    check_payoff_dimension(spec, bounds.size());
    return {[spec](double, std::span<const double> x) { return payoff(spec, x); }, payoff_sup(spec, bounds)};
}

TerminalCondition make_terminal(const PayoffSpec& spec, std::span<const double> bounds) {
    check_payoff_dimension(spec, bounds.size());
    return {[spec](std::span<const double> x) { return payoff(spec, x); }, payoff_sup(spec, bounds)};
}

Driver linear_pricing_driver(double rate) {
    if (!std::isfinite(rate)) throw std::invalid_argument("linear_pricing_driver: rate must be finite");
    return {[rate](double, std::span<const double>, double y, std::span<const double>) { return -rate * y; },
            std::max(std::abs(rate), 1e-8), 0.0};
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double black_scholes_put(double spot, double strike, double rate, double volatility, double maturity) {
    if (!(strike > 0.0)) return 0.0;
    const double discounted_strike = strike * std::exp(-rate * maturity);
    const double spread = volatility * std::sqrt(maturity);
    if (!(spread > 0.0)) return std::max(discounted_strike - spot, 0.0);
    const double d1 = (std::log(spot / strike) + (rate + 0.5 * volatility * volatility) * maturity) / spread;
    const double d2 = d1 - spread;
    return discounted_strike * normal_cdf(-d2) - spot * normal_cdf(-d1);
}

EffectiveAsset geometric_basket_reduction(const BlackScholesSpec& spec, double maturity) {
    spec.validate();
    const std::size_t d = spec.dimension();
    if (!spec.correlation.empty()) throw std::invalid_argument("geometric_basket_reduction: assets must be independent");
    const double sigma = spec.volatilities[0];
    const double mu = spec.dividends[0];
    for (std::size_t i = 1; i < d; ++i)
        if (spec.volatilities[i] != sigma || spec.dividends[i] != mu)
            throw std::invalid_argument("geometric_basket_reduction: assets must share volatility and dividend");

    const auto dd = static_cast<double>(d);
    double log_mean = 0.0;
    for (double s : spec.spots) log_mean += std::log(s) / dd;
    const double sigma_eff = sigma / std::sqrt(dd);
    // log G_T has drift r - mu - sigma^2/2 and volatility sigma/sqrt(d); a
    // zero-dividend asset with volatility sigma_eff has drift r - sigma_eff^2/2.
    const double dividend_eff = mu + 0.5 * sigma * sigma - 0.5 * sigma_eff * sigma_eff;
    return {std::exp(log_mean - dividend_eff * maturity), sigma_eff};
}

}  // namespace bsde
