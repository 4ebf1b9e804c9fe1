#pragma once

// Closed-form optimal policies of a single CARA agent trading the annuity in
// a frictionless shadow market with constant rate r (annuity value 1/r).

#include <cmath>

#include "radner/model.hpp"

namespace radner {

struct PolicyContext {
    AgentParams agent;
    double shadow_rate = 0.0;
    TimeGrid grid = Continuous{};

    PolicyContext() = default;
    PolicyContext(AgentParams a, double r, TimeGrid g) : agent(a), shadow_rate(r), grid(g) {
        if (!(r > 0.0)) throw DomainError("shadow rate must be > 0");
    }

    double annuity_value() const { return 1.0 / shadow_rate; }
    double beta_tilde() const { return effective_discount(agent).value; }
};

struct PolicyPoint {
    double time = 0.0;
    double wealth = 0.0;
    double consumption = 0.0;
    double holdings = 0.0;
};

namespace detail {

inline double require_discrete(const PolicyContext& ctx) {
    const auto* d = std::get_if<Discrete>(&ctx.grid);
    if (!d) throw InvalidParams("discrete policy evaluated on a continuous grid");
    return d->delta;
}

inline void require_continuous(const PolicyContext& ctx) {
    if (is_discrete(ctx.grid)) throw InvalidParams("continuous policy evaluated on a discrete grid");
}

} // namespace detail

// Shares held when shadow wealth is `wealth`.
inline double holdings_of(const PolicyContext& ctx, double wealth) { return ctx.shadow_rate * wealth; }

/// Shares bought per step: (log(1 + r delta) - beta_tilde delta) / alpha.
inline double trade_per_step(const PolicyContext& ctx) {
    const double delta = detail::require_discrete(ctx);
    return (std::log1p(ctx.shadow_rate * delta) - ctx.beta_tilde() * delta) / ctx.agent.alpha;
}

/// Shares bought per unit time in continuous time: (r - beta_tilde) / alpha.
inline double trade_rate_cts(const PolicyContext& ctx) {
    detail::require_continuous(ctx);
    return (ctx.shadow_rate - ctx.beta_tilde()) / ctx.agent.alpha;
}

/// Optimal shadow wealth at t_n = n delta:
/// theta0/r + (t_n / (alpha r)) (log(1 + r delta)/delta - beta_tilde).
/// Deterministic; it moves by the excess demand F(r) every step.
inline double optimal_wealth_discrete(const PolicyContext& ctx, long long n) {
    const double delta = detail::require_discrete(ctx);
    const double r = ctx.shadow_rate;
    return ctx.agent.theta0 / r + static_cast<double>(n) * excess_demand_discrete(r, ctx.agent, delta);
}

/// r X + Y + (beta_tilde delta - log(1 + r delta)) / (alpha r delta).
inline double optimal_consumption_discrete(const PolicyContext& ctx, double wealth, double income) {
    const double delta = detail::require_discrete(ctx);
    const double r = ctx.shadow_rate;
    return r * wealth + income - excess_demand_discrete(r, ctx.agent, delta) / delta;
}

/// Discrete value function
/// -(1/(r delta)) (1 + r delta)^{1 + 1/(r delta)} exp(-alpha r x - alpha y - beta_tilde / r).
/// Evaluated in log space so that small steps do not overflow the power.
inline double value_discrete(const PolicyContext& ctx, double x, double y) {
    const double delta = detail::require_discrete(ctx);
    const double r = ctx.shadow_rate;
    const double a = ctx.agent.alpha;
    const double u = r * delta;
    const double log_scale = std::log1p(u) * (1.0 + 1.0 / u);
    return -std::exp(log_scale - a * r * x - a * y - ctx.beta_tilde() / r) / u;
}

/// -e^{-alpha c} + e^{-beta delta} E[J(X_1, Y_1)] for one step from (x, y)
/// consuming c, with X_1 = x + (x r + y - c) delta and Gaussian income
/// increment. The Gaussian expectation is taken in closed form. Maximised at
/// the optimal consumption, where it equals value_discrete(x, y).
inline double bellman_rhs_discrete(const PolicyContext& ctx, double x, double y, double c) {
    const double delta = detail::require_discrete(ctx);
    const auto& ag = ctx.agent;
    const double x_next = x + (x * ctx.shadow_rate + y - c) * delta;
    const double y_mean = y + ag.mu * delta;
    const double gauss = 0.5 * ag.alpha * ag.alpha * ag.sigma * ag.sigma * delta;
    const double continuation = std::exp(-ag.beta * delta + gauss) * value_discrete(ctx, x_next, y_mean);
    return -std::exp(-ag.alpha * c) + continuation;
}

/// theta0/r + (1/alpha)(1 - beta_tilde / r) t.
inline double optimal_wealth_cts(const PolicyContext& ctx, double t) {
    detail::require_continuous(ctx);
    return ctx.agent.theta0 / ctx.shadow_rate + excess_demand_cts(ctx.shadow_rate, ctx.agent) * t;
}

/// r X + Y + beta_tilde/(r alpha) - 1/alpha.
inline double optimal_consumption_cts(const PolicyContext& ctx, double wealth, double income) {
    detail::require_continuous(ctx);
    return ctx.shadow_rate * wealth + income - excess_demand_cts(ctx.shadow_rate, ctx.agent);
}

/// -(1/r) exp(-alpha r x - alpha y + 1 - beta_tilde / r).
inline double value_cts(const PolicyContext& ctx, double x, double y) {
    detail::require_continuous(ctx);
    const double r = ctx.shadow_rate;
    const double a = ctx.agent.alpha;
    return -std::exp(-a * r * x - a * y + 1.0 - ctx.beta_tilde() / r) / r;
}

/// Full optimal state at step n (discrete) given the realised income.
inline PolicyPoint policy_point_discrete(const PolicyContext& ctx, long long n, double income) {
    const double delta = detail::require_discrete(ctx);
    PolicyPoint p;
    p.time = static_cast<double>(n) * delta;
    p.wealth = optimal_wealth_discrete(ctx, n);
    p.consumption = optimal_consumption_discrete(ctx, p.wealth, income);
    p.holdings = holdings_of(ctx, p.wealth);
    return p;
}

inline PolicyPoint policy_point_cts(const PolicyContext& ctx, double t, double income) {
    PolicyPoint p;
    p.time = t;
    p.wealth = optimal_wealth_cts(ctx, t);
    p.consumption = optimal_consumption_cts(ctx, p.wealth, income);
    p.holdings = holdings_of(ctx, p.wealth);
    return p;
}

} // namespace radner
