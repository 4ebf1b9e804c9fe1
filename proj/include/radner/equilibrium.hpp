#pragma once

// Constant-rate equilibria of the two-agent annuity economy with proportional
// transaction costs, in discrete and continuous time, plus the feasibility
// verdict for a traded bank account.

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "radner/model.hpp"
#include "radner/policy.hpp"

namespace radner {

struct RateInterval {
    double lo = 0.0;
    double hi = 0.0;

    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double r) const { return lo <= r && r <= hi; }

    friend bool operator==(const RateInterval&, const RateInterval&) = default;
};

// Market rate: a point when trade occurs, an interval of consistent rates otherwise.
using MarketRate = std::variant<double, RateInterval>;

struct EquilibriumSolution {
    Agents agents{};
    double lambda = 0.0;
    TimeGrid grid = Continuous{};

    Regime regime = Regime::NoTrade;
    double shadow_rate_1 = 0.0;
    double shadow_rate_2 = 0.0;
    MarketRate market_rate = 0.0;
    // Agent 1's shares bought per step (discrete) or per unit time (continuous).
    double trade_per_step = 0.0;

    double shadow_rate(std::size_t i) const { return i == 0 ? shadow_rate_1 : shadow_rate_2; }
    double annuity_value(std::size_t i) const { return 1.0 / shadow_rate(i); }

    RateInterval rate_interval() const {
        if (const auto* p = std::get_if<double>(&market_rate)) return {*p, *p};
        return std::get<RateInterval>(market_rate);
    }

    MarketParams market() const { return {lambda, grid}; }
    PolicyContext policy(std::size_t i) const { return {agents.at(i), shadow_rate(i), grid}; }

    friend bool operator==(const EquilibriumSolution&, const EquilibriumSolution&) = default;
};

namespace detail {

constexpr int kBisectionMaxIter = 200;
constexpr double kBisectionRelWidth = 1e-14;

inline double risk_tolerance_weighted_sum(const Agents& agents) {
    return effective_discount(agents[0]).value / agents[0].alpha +
           effective_discount(agents[1]).value / agents[1].alpha;
}

inline EquilibriumSolution mirror(EquilibriumSolution s) {
    std::swap(s.agents[0], s.agents[1]);
    std::swap(s.shadow_rate_1, s.shadow_rate_2);
    s.regime = mirrored(s.regime);
    return s;
}

// Agent 1's trade at its shadow rate, per step or per unit time.
inline double agent1_trade(const EquilibriumSolution& s) {
    const PolicyContext ctx = s.policy(0);
    return is_discrete(s.grid) ? trade_per_step(ctx) : trade_rate_cts(ctx);
}

} // namespace detail

/// log G(delta, r) for the agent-1-buys orientation, where
/// G = (1 + r delta/(1+l))^{1/(a1 delta)} (1 + r delta/(1-l))^{1/(a2 delta)}
/// for delta > 0 and G(0, r) = exp(r (1/(a1(1+l)) + 1/(a2(1-l)))).
inline double rate_equation_log_lhs(const Agents& agents, double lambda, double delta, double r) {
    const double a1 = agents[0].alpha;
    const double a2 = agents[1].alpha;
    if (delta == 0.0) return r * (1.0 / (a1 * (1.0 + lambda)) + 1.0 / (a2 * (1.0 - lambda)));
    const double u = r * delta;
    return (std::log1p(u / (1.0 + lambda)) / a1 + std::log1p(u / (1.0 - lambda)) / a2) / delta;
}

/// log of the right-hand side e^{bt1/a1 + bt2/a2}.
inline double rate_equation_log_rhs(const Agents& agents) { return detail::risk_tolerance_weighted_sum(agents); }

/// G(delta, r) / e^{bt1/a1 + bt2/a2} - 1.
inline double rate_equation_residual(const Agents& agents, double lambda, double delta, double r) {
    return std::expm1(rate_equation_log_lhs(agents, lambda, delta, r) - rate_equation_log_rhs(agents));
}

/// Open interval of market rates that must contain the agent-1-buys root:
/// ((1+l)(e^{bt1 delta}-1)/delta, (1-l)(e^{bt2 delta}-1)/delta).
inline RateInterval discrete_rate_bracket(const Agents& agents, double lambda, double delta) {
    const double g1 = autarky_growth(effective_discount(agents[0]).value, delta);
    const double g2 = autarky_growth(effective_discount(agents[1]).value, delta);
    return {(1.0 + lambda) * g1 / delta, (1.0 - lambda) * g2 / delta};
}

namespace detail {

// Market rate for the agent-1-buys case, found by bisection in u = r delta on
// log G(delta, u/delta) - log rhs, which is strictly increasing in u.
inline double solve_rate_equation(const Agents& agents, double lambda, double delta) {
    const double a1 = agents[0].alpha;
    const double a2 = agents[1].alpha;
    const double target = rate_equation_log_rhs(agents) * delta;
    auto h = [&](double u) {
        return std::log1p(u / (1.0 + lambda)) / a1 + std::log1p(u / (1.0 - lambda)) / a2 - target;
    };

    const RateInterval bracket = discrete_rate_bracket(agents, lambda, delta);
    double lo = bracket.lo * delta;
    double hi = bracket.hi * delta;
    if (!(lo < hi) || !(h(lo) < 0.0) || !(h(hi) > 0.0))
        throw NumericalFailure("rate equation root is not bracketed");

    int iter = 0;
    for (; iter < kBisectionMaxIter; ++iter) {
        if (hi - lo <= kBisectionRelWidth * hi) break;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (h(mid) < 0.0 ? lo : hi) = mid;
    }
    const double u = 0.5 * (lo + hi);
    if (iter == kBisectionMaxIter && std::abs(std::expm1(h(u) / delta)) > 1e-10)
        throw NumericalFailure("bisection did not converge on the rate equation");
    return u / delta;
}

inline EquilibriumSolution agent1_buys(const Agents& agents, double lambda, const TimeGrid& grid) {
    EquilibriumSolution s;
    s.agents = agents;
    s.lambda = lambda;
    s.grid = grid;
    s.regime = Regime::Agent1Buys;

    double r = 0.0;
    if (const auto* d = std::get_if<Discrete>(&grid)) {
        r = solve_rate_equation(agents, lambda, d->delta);
    } else {
        const double denom = 1.0 / (agents[0].alpha * (1.0 + lambda)) + 1.0 / (agents[1].alpha * (1.0 - lambda));
        r = risk_tolerance_weighted_sum(agents) / denom;
    }
    s.market_rate = r;
    s.shadow_rate_1 = r / (1.0 + lambda);
    s.shadow_rate_2 = r / (1.0 - lambda);
    return s;
}

inline EquilibriumSolution no_trade(const Agents& agents, double lambda, const TimeGrid& grid) {
    EquilibriumSolution s;
    s.agents = agents;
    s.lambda = lambda;
    s.grid = grid;
    s.regime = Regime::NoTrade;
    s.shadow_rate_1 = autarky_rate(agents[0], grid);
    s.shadow_rate_2 = autarky_rate(agents[1], grid);
    const double lo = (1.0 - lambda) * std::max(s.shadow_rate_1, s.shadow_rate_2);
    const double hi = (1.0 + lambda) * std::min(s.shadow_rate_1, s.shadow_rate_2);
    s.market_rate = RateInterval{lo, hi};
    s.trade_per_step = 0.0;
    return s;
}

} // namespace detail

/// Equilibrium for the given market. Trade regimes get a unique market rate r
/// with shadow rates r/(1+l) for the buyer and r/(1-l) for the seller; the
/// no-trade regime gets autarky shadow rates and the interval of consistent
/// market rates.
inline EquilibriumSolution solve(const Agents& agents, const MarketParams& market) {
    require_solvable(agents, market);
    EquilibriumSolution s;
    switch (classify_regime(agents, market)) {
    case Regime::NoTrade:
        return detail::no_trade(agents, market.lambda, market.grid);
    case Regime::Agent1Buys:
        s = detail::agent1_buys(agents, market.lambda, market.grid);
        break;
    case Regime::Agent2Buys:
        s = detail::mirror(detail::agent1_buys(swapped(agents), market.lambda, market.grid));
        break;
    }
    s.trade_per_step = detail::agent1_trade(s);
    return s;
}

inline EquilibriumSolution solve_cts(const Agents& agents, double lambda) {
    return solve(agents, MarketParams{lambda, Continuous{}});
}

inline EquilibriumSolution solve_discrete(const Agents& agents, double lambda, double delta) {
    return solve(agents, MarketParams{lambda, Discrete{delta}});
}

/// Replaces the market rate of a solution by `rate` and rebuilds the shadow
/// rates and trade from it, keeping the regime. In the no-trade regime both
/// shadow rates become `rate`. The result is generally not an equilibrium;
/// verifiers use it to show that they reject wrong rates.
inline EquilibriumSolution with_market_rate(const EquilibriumSolution& solution, double rate) {
    if (!(rate > 0.0)) throw InvalidParams("override rate must be > 0");
    EquilibriumSolution s = solution;
    const double lam = s.lambda;
    switch (s.regime) {
    case Regime::Agent1Buys:
        s.shadow_rate_1 = rate / (1.0 + lam);
        s.shadow_rate_2 = rate / (1.0 - lam);
        break;
    case Regime::Agent2Buys:
        s.shadow_rate_1 = rate / (1.0 - lam);
        s.shadow_rate_2 = rate / (1.0 + lam);
        break;
    case Regime::NoTrade:
        s.shadow_rate_1 = rate;
        s.shadow_rate_2 = rate;
        break;
    }
    s.market_rate = rate;
    s.trade_per_step = detail::agent1_trade(s);
    return s;
}

// Equilibrium conditions evaluated on a solution.
struct SolutionChecks {
    double excess_1 = 0.0;          // F_1(r_1)
    double excess_2 = 0.0;          // F_2(r_2)
    double wealth_clearing = 0.0;   // F_1 + F_2 - l (|F_1| + |F_2|)
    double share_clearing = 0.0;    // r_1 F_1 + r_2 F_2
    double annuity_ratio = 0.0;     // A_1 / A_2
    bool ratio_in_band = false;
    bool ratio_on_required_edge = false; // edge matches the trade direction, or no trade
};

inline SolutionChecks check_solution(const EquilibriumSolution& s) {
    SolutionChecks c;
    const double r1 = s.shadow_rate_1;
    const double r2 = s.shadow_rate_2;
    if (const auto* d = std::get_if<Discrete>(&s.grid)) {
        c.excess_1 = excess_demand_discrete(r1, s.agents[0], d->delta);
        c.excess_2 = excess_demand_discrete(r2, s.agents[1], d->delta);
    } else {
        c.excess_1 = excess_demand_cts(r1, s.agents[0]);
        c.excess_2 = excess_demand_cts(r2, s.agents[1]);
    }
    if (s.regime == Regime::NoTrade) {
        // Autarky rates make both excess demands vanish in exact arithmetic.
        c.wealth_clearing = c.excess_1 + c.excess_2;
    } else {
        c.wealth_clearing = c.excess_1 + c.excess_2 - s.lambda * (std::abs(c.excess_1) + std::abs(c.excess_2));
    }
    c.share_clearing = r1 * c.excess_1 + r2 * c.excess_2;

    const double lam = s.lambda;
    const double lower = (1.0 - lam) / (1.0 + lam);
    const double upper = (1.0 + lam) / (1.0 - lam);
    const double tol = 1e-12;
    c.annuity_ratio = r2 / r1;
    c.ratio_in_band = c.annuity_ratio >= lower * (1.0 - tol) && c.annuity_ratio <= upper * (1.0 + tol);
    const double trade = s.trade_per_step;
    if (trade > 0.0)
        c.ratio_on_required_edge = std::abs(c.annuity_ratio / upper - 1.0) <= tol;
    else if (trade < 0.0)
        c.ratio_on_required_edge = std::abs(c.annuity_ratio / lower - 1.0) <= tol;
    else
        c.ratio_on_required_edge = true;
    return c;
}

struct Infeasible {
    std::string reason;
};

struct NoTradeOnly {
    double rate = 0.0;
};

using BankVerdict = std::variant<Infeasible, NoTradeOnly>;

/// Decides whether a constant-rate equilibrium with a traded bank account can
/// exist. With l > 0 closeness at every horizon forces r_1 = r_2 and no trade,
/// so both excess demands vanish and the effective discounts must coincide.
inline BankVerdict check_bank_constant_equilibrium(const Agents& agents, double lambda, double delta) {
    if (!(lambda > 0.0))
        throw PreconditionViolated("bank-account result requires a strictly positive transaction cost");
    require_solvable(agents, MarketParams{lambda, Discrete{delta}});
    const double b1 = effective_discount(agents[0]).value;
    const double b2 = effective_discount(agents[1]).value;
    if (std::abs(b1 - b2) <= 1e-12 * std::max(1.0, std::abs(b1)))
        return NoTradeOnly{autarky_growth(b1, delta) / delta};
    return Infeasible{"constant shadow rates force r1 = r2 with no trade, so F1(r1) = F2(r2) = 0 requires "
                      "equal effective discounts, but beta_tilde_1 = " +
                      std::to_string(b1) + " differs from beta_tilde_2 = " + std::to_string(b2)};
}

} // namespace radner
