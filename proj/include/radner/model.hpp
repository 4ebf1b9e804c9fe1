#pragma once

// Model primitives for the two-agent annuity economy: preferences, income
// laws, the transaction-cost market, effective discount rates, excess-demand
// functions and regime classification.

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "radner/error.hpp"

namespace radner {

struct AgentParams {
    double alpha = 1.0;  // absolute risk aversion
    double beta = 0.1;   // time preference
    double mu = 0.0;     // income drift
    double sigma = 0.0;  // income volatility
    double theta0 = 0.5; // initial annuity shares
    double y0 = 0.0;     // initial income level

    friend bool operator==(const AgentParams&, const AgentParams&) = default;
};

using Agents = std::array<AgentParams, 2>;

inline Agents swapped(const Agents& agents) { return {agents[1], agents[0]}; }

struct Discrete {
    double delta = 1.0;
    friend bool operator==(const Discrete&, const Discrete&) = default;
};

struct Continuous {
    friend bool operator==(const Continuous&, const Continuous&) = default;
};

using TimeGrid = std::variant<Discrete, Continuous>;

inline bool is_discrete(const TimeGrid& grid) { return std::holds_alternative<Discrete>(grid); }

// Step size of a discrete grid; throws InvalidParams for continuous time.
inline double step_of(const TimeGrid& grid) {
    if (const auto* d = std::get_if<Discrete>(&grid)) return d->delta;
    throw InvalidParams("operation requires a discrete time grid");
}

struct MarketParams {
    double lambda = 0.0;
    TimeGrid grid = Continuous{};

    friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

struct EffectiveDiscount {
    double value = 0.0;
};

enum class Regime { NoTrade, Agent1Buys, Agent2Buys };

inline std::string_view to_string(Regime regime) {
    switch (regime) {
    case Regime::NoTrade: return "no_trade";
    case Regime::Agent1Buys: return "agent1_buys";
    case Regime::Agent2Buys: return "agent2_buys";
    }
    return "unknown";
}

inline Regime regime_from_string(std::string_view name) {
    if (name == "no_trade") return Regime::NoTrade;
    if (name == "agent1_buys") return Regime::Agent1Buys;
    if (name == "agent2_buys") return Regime::Agent2Buys;
    throw ParseError("unknown regime '" + std::string(name) + "'");
}

// Role swap: the regime seen with the agents listed in the other order.
inline Regime mirrored(Regime regime) {
    switch (regime) {
    case Regime::Agent1Buys: return Regime::Agent2Buys;
    case Regime::Agent2Buys: return Regime::Agent1Buys;
    default: return Regime::NoTrade;
    }
}

/// beta + alpha*mu - alpha^2 sigma^2 / 2: the agent's no-trade shadow rate in
/// continuous time.
inline EffectiveDiscount effective_discount(const AgentParams& agent) {
    return {agent.beta + agent.alpha * agent.mu - 0.5 * agent.alpha * agent.alpha * agent.sigma * agent.sigma};
}

/// Checks the agent's own invariants (alpha > 0, beta > 0, sigma >= 0) and
/// returns one message per violation, each prefixed with `path`.
inline std::vector<std::string> agent_problems(const AgentParams& agent, const std::string& path) {
    std::vector<std::string> out;
    if (!(agent.alpha > 0.0)) out.push_back(path + ".alpha must be > 0");
    if (!(agent.beta > 0.0)) out.push_back(path + ".beta must be > 0");
    if (!(agent.sigma >= 0.0)) out.push_back(path + ".sigma must be >= 0");
    if (!std::isfinite(agent.mu)) out.push_back(path + ".mu must be finite");
    if (!std::isfinite(agent.theta0)) out.push_back(path + ".theta0 must be finite");
    if (!std::isfinite(agent.y0)) out.push_back(path + ".y0 must be finite");
    return out;
}

inline std::vector<std::string> market_problems(const MarketParams& market) {
    std::vector<std::string> out;
    if (!(market.lambda >= 0.0 && market.lambda < 1.0)) out.push_back("lambda must be in [0,1)");
    if (const auto* d = std::get_if<Discrete>(&market.grid); d && !(d->delta > 0.0 && std::isfinite(d->delta)))
        out.push_back("delta must be > 0");
    return out;
}

/// Solver precondition: agent invariants, market invariants and beta_tilde > 0
/// for both agents. Throws InvalidParams listing every violation.
inline void require_solvable(const Agents& agents, const MarketParams& market) {
    std::vector<std::string> problems;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const std::string path = "agents[" + std::to_string(i) + "]";
        auto p = agent_problems(agents[i], path);
        problems.insert(problems.end(), p.begin(), p.end());
        if (p.empty() && !(effective_discount(agents[i]).value > 0.0))
            problems.push_back(path + " effective discount beta + alpha*mu - alpha^2*sigma^2/2 must be > 0");
    }
    auto m = market_problems(market);
    problems.insert(problems.end(), m.begin(), m.end());
    if (!problems.empty()) {
        std::string msg;
        for (const auto& s : problems) msg += (msg.empty() ? "" : "; ") + s;
        throw InvalidParams(msg);
    }
}

/// Per-period value of the agent's optimal annuity trade at shadow rate r on a
/// grid of step delta: (log(1 + r delta) - beta_tilde delta) / (alpha r).
inline double excess_demand_discrete(double r, const AgentParams& agent, double delta) {
    if (!(r > 0.0)) throw DomainError("excess demand requires a strictly positive rate");
    if (!(delta > 0.0)) throw DomainError("excess demand requires a strictly positive time step");
    const double bt = effective_discount(agent).value;
    return (std::log1p(r * delta) - bt * delta) / (agent.alpha * r);
}

/// Continuous-time excess demand (1 - beta_tilde / r) / alpha.
inline double excess_demand_cts(double r, const AgentParams& agent) {
    if (!(r > 0.0)) throw DomainError("excess demand requires a strictly positive rate");
    const double bt = effective_discount(agent).value;
    return (1.0 - bt / r) / agent.alpha;
}

// e^{beta_tilde delta} - 1: the agent's autarky growth factor over one step.
inline double autarky_growth(double beta_tilde, double delta) { return std::expm1(beta_tilde * delta); }

/// The shadow rate at which the agent does not trade: (e^{bt delta} - 1)/delta
/// in discrete time, bt in continuous time.
inline double autarky_rate(const AgentParams& agent, const TimeGrid& grid) {
    const double bt = effective_discount(agent).value;
    if (const auto* d = std::get_if<Discrete>(&grid)) return autarky_growth(bt, d->delta) / d->delta;
    return bt;
}

/// Ratio of autarky rates, agent 2 over agent 1. Discrete time uses
/// (e^{bt2 delta} - 1)/(e^{bt1 delta} - 1), continuous time bt2/bt1.
inline double regime_ratio(const Agents& agents, const TimeGrid& grid) {
    return autarky_rate(agents[1], grid) / autarky_rate(agents[0], grid);
}

/// Places the autarky-rate ratio against the band [(1-l)/(1+l), (1+l)/(1-l)].
/// The band is closed, so a ratio on the edge is NoTrade. The comparison is
/// cross-multiplied so that NoTrade coincides with a nonempty rate interval in
/// floating point as well.
inline Regime classify_regime(const Agents& agents, const MarketParams& market) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (!(effective_discount(agents[i]).value > 0.0))
            throw InvalidParams("agents[" + std::to_string(i) + "] effective discount must be > 0");
    }
    const double lam = market.lambda;
    const double g1 = autarky_rate(agents[0], market.grid);
    const double g2 = autarky_rate(agents[1], market.grid);
    if ((1.0 - lam) * g2 > (1.0 + lam) * g1) return Regime::Agent1Buys;
    if ((1.0 + lam) * g2 < (1.0 - lam) * g1) return Regime::Agent2Buys;
    return Regime::NoTrade;
}

} // namespace radner
