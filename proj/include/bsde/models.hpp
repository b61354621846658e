#pragma once

#include "bsde/forward_model.hpp"
#include "bsde/problem.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bsde {

/// d-asset Black-Scholes market: dS_l / S_l = (r - mu_l) dt + sigma_l dW_l.
struct BlackScholesSpec {
    double rate = 0.0;
    std::vector<double> dividends;
    std::vector<double> volatilities;
    std::vector<double> spots;
    /// Row-major d x d correlation of the Brownian drivers; empty means identity.
    std::vector<double> correlation;

    std::size_t dimension() const noexcept { return spots.size(); }
    void validate() const;
};

/// Forward model in log-price coordinates: X_l = log S_l with drift
/// r - mu_l - sigma_l^2 / 2 and diffusion diag(sigma) (times the Cholesky
/// factor of the correlation, when given).
ForwardModel build_forward(const BlackScholesSpec& spec);

std::vector<double> log_spots(const BlackScholesSpec& spec);

enum class PayoffKind {
    /// (K - (prod_i S_i)^{1/d})_+
    geometric_put,
    /// max(S_1...S_p - S_{p+1}...S_{2p}, 0), d = 2p
    product_exchange,
};

struct PayoffSpec {
    PayoffKind kind = PayoffKind::geometric_put;
    double strike = 0.0;
};

/// Payoff as a function of log-prices.
double payoff(const PayoffSpec& spec, std::span<const double> log_prices);

/// sup of the payoff over the log-price box [-R_i, R_i], i.e. sup|phi^R|.
double payoff_sup(const PayoffSpec& spec, std::span<const double> bounds);

/// Time-homogeneous obstacle / terminal condition built from a payoff, with
/// the sup-norm declared for `bounds`.
Obstacle make_obstacle(const PayoffSpec& spec, std::span<const double> bounds);
TerminalCondition make_terminal(const PayoffSpec& spec, std::span<const double> bounds);

/// f(t, x, y, z) = -r y (risk-neutral pricing). C_f = max(|r|, 1e-8) and
/// sup|f(t, x, 0, 0)| = 0.
Driver linear_pricing_driver(double rate);

/// Closed-form European put on a lognormal asset with zero dividend.
double black_scholes_put(double spot, double strike, double rate, double volatility, double maturity);

/// The geometric mean of d independent assets with equal volatility and
/// dividend is lognormal. Returns the zero-dividend spot and volatility
/// that reproduce its European prices.
struct EffectiveAsset {
    double spot;
    double volatility;
};
EffectiveAsset geometric_basket_reduction(const BlackScholesSpec& spec, double maturity);

}  // namespace bsde
