#pragma once

// Comparative statics of the equilibrium rate: lambda sweeps, dr/dlambda and
// the discrete-to-continuous convergence study.

#include <algorithm>
#include <cmath>
#include <vector>

#include "radner/equilibrium.hpp"

namespace radner {

struct SweepRow {
    double param = 0.0;
    Regime regime = Regime::NoTrade;
    double r_lo = 0.0;
    double r_mid = 0.0;
    double r_hi = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double trade_rate = 0.0;
};

inline SweepRow sweep_row(double param, const EquilibriumSolution& s) {
    const RateInterval iv = s.rate_interval();
    return {param, s.regime, iv.lo, iv.mid(), iv.hi, s.shadow_rate_1, s.shadow_rate_2, s.trade_per_step};
}

/// One continuous-time solution per lambda, rows in increasing lambda.
inline std::vector<SweepRow> sweep_lambda(const Agents& agents, std::vector<double> lambdas) {
    std::stable_sort(lambdas.begin(), lambdas.end());
    std::vector<SweepRow> rows;
    rows.reserve(lambdas.size());
    for (double lam : lambdas) rows.push_back(sweep_row(lam, solve_cts(agents, lam)));
    return rows;
}

/// Continuous-time trade-regime rate with agent 1 buying,
/// (bt1/a1 + bt2/a2) / (1/(a1(1+l)) + 1/(a2(1-l))), for any l in (-1, 1).
inline double cts_trade_rate_formula(const Agents& agents, double lambda) {
    const double a1 = agents[0].alpha;
    const double a2 = agents[1].alpha;
    const double num = effective_discount(agents[0]).value / a1 + effective_discount(agents[1]).value / a2;
    return num / (1.0 / (a1 * (1.0 + lambda)) + 1.0 / (a2 * (1.0 - lambda)));
}

struct RateSensitivity {
    double analytic = 0.0;
    double finite_difference = 0.0;
};

/// dr/dlambda of the continuous-time rate in a trade regime, analytically
/// (-N D'/D^2) and by central differences with step 1e-6 on the rate formula.
inline RateSensitivity rate_sensitivity(const Agents& agents, double lambda) {
    const EquilibriumSolution s = solve_cts(agents, lambda);
    if (s.regime == Regime::NoTrade) throw RegimeMismatch("rate sensitivity needs a trade regime");
    // Put the buyer first so the agent-1-buys formula applies.
    const Agents oriented = s.regime == Regime::Agent1Buys ? agents : swapped(agents);

    const double a1 = oriented[0].alpha;
    const double a2 = oriented[1].alpha;
    const double num = effective_discount(oriented[0]).value / a1 + effective_discount(oriented[1]).value / a2;
    const double d = 1.0 / (a1 * (1.0 + lambda)) + 1.0 / (a2 * (1.0 - lambda));
    const double d_prime = -1.0 / (a1 * (1.0 + lambda) * (1.0 + lambda)) + 1.0 / (a2 * (1.0 - lambda) * (1.0 - lambda));

    constexpr double h = 1e-6;
    RateSensitivity out;
    out.analytic = -num * d_prime / (d * d);
    out.finite_difference =
        (cts_trade_rate_formula(oriented, lambda + h) - cts_trade_rate_formula(oriented, lambda - h)) / (2.0 * h);
    return out;
}

struct DeltaSweep {
    std::vector<SweepRow> rows;
    std::vector<double> distance; // |r(delta) - r(0)| per row, using the mid rate
    double r0 = 0.0;
    // Least-squares fit of log distance = log constant + order * log delta.
    double order = 0.0;
    double constant = 0.0;
};

/// Discrete solutions along a grid of steps against the continuous-time limit.
/// Requires the continuous-time economy to trade.
inline DeltaSweep sweep_delta(const Agents& agents, double lambda, const std::vector<double>& deltas) {
    const EquilibriumSolution limit = solve_cts(agents, lambda);
    if (limit.regime == Regime::NoTrade)
        throw RegimeMismatch("convergence study needs trade in the continuous-time limit");

    DeltaSweep out;
    out.r0 = limit.rate_interval().mid();
    std::vector<double> lx, ly;
    for (double delta : deltas) {
        const SweepRow row = sweep_row(delta, solve_discrete(agents, lambda, delta));
        const double dist = std::abs(row.r_mid - out.r0);
        out.rows.push_back(row);
        out.distance.push_back(dist);
        if (dist > 0.0) {
            lx.push_back(std::log(delta));
            ly.push_back(std::log(dist));
        }
    }
    if (lx.size() >= 2) {
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        out.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        out.constant = std::exp((sy - out.order * sx) / n);
    }
    return out;
}

} // namespace radner
