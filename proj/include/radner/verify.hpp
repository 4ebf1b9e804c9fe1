#pragma once

// Invariant suite run by `radner verify`: solution-level equilibrium
// conditions plus simulation-based clearing, transversality and martingale
// checks.

#include <string>
#include <vector>

#include "radner/equilibrium.hpp"
#include "radner/io.hpp"
#include "radner/simulate.hpp"

namespace radner {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline CheckResult bound_check(std::string name, double value, double bound) {
    const bool ok = std::abs(value) <= bound;
    return {std::move(name), ok, "|" + format_number(value) + "| <= " + format_number(bound)};
}

} // namespace detail

inline std::vector<CheckResult> run_invariant_suite(const EquilibriumSolution& s, const SimConfig& sim) {
    std::vector<CheckResult> out;
    const SolutionChecks c = check_solution(s);
    out.push_back(detail::bound_check("wealth_clearing", c.wealth_clearing, 1e-12));
    out.push_back(detail::bound_check("share_clearing", c.share_clearing, 1e-12));
    out.push_back({"closeness_band", c.ratio_in_band, "A1/A2 = " + format_number(c.annuity_ratio)});
    out.push_back({"closeness_edge", c.ratio_on_required_edge, "trade = " + format_number(s.trade_per_step)});

    const bool trades = s.regime != Regime::NoTrade;
    if (trades) {
        const Agents oriented = s.regime == Regime::Agent1Buys ? s.agents : swapped(s.agents);
        const double r = s.rate_interval().lo;
        const double delta = is_discrete(s.grid) ? step_of(s.grid) : 0.0;
        out.push_back(detail::bound_check("rate_equation_residual",
                                          rate_equation_residual(oriented, s.lambda, delta, r), 1e-12));
        if (delta > 0.0) {
            const RateInterval br = discrete_rate_bracket(oriented, s.lambda, delta);
            out.push_back({"root_in_bracket", br.lo < r && r < br.hi,
                           format_number(br.lo) + " < " + format_number(r) + " < " + format_number(br.hi)});
        }
    }

    if (!is_discrete(s.grid)) {
        // Clearing along deterministic time points with arbitrary income levels.
        double worst_real = 0.0, worst_fin = 0.0;
        const auto p1 = s.policy(0);
        const auto p2 = s.policy(1);
        const double d1 = trade_rate_cts(p1);
        double price = 0.0;
        if (d1 > 0.0) price = s.annuity_value(0) / (1.0 + s.lambda);
        else if (d1 < 0.0) price = s.annuity_value(1) / (1.0 + s.lambda);
        for (double t : {0.0, 1.0, 10.0, 100.0}) {
            const double y1 = s.agents[0].y0 + s.agents[0].mu * t;
            const double y2 = s.agents[1].y0 + s.agents[1].mu * t;
            const auto a = policy_point_cts(p1, t, y1);
            const auto b = policy_point_cts(p2, t, y2);
            worst_real = std::max(worst_real,
                                  std::abs(a.consumption + b.consumption - 1.0 - y1 - y2 + 2.0 * s.lambda * std::abs(d1) * price));
            worst_fin = std::max(worst_fin, std::abs(a.holdings + b.holdings - 1.0));
        }
        out.push_back(detail::bound_check("real_clearing_cts", worst_real, 1e-10));
        out.push_back(detail::bound_check("financial_clearing_cts", worst_fin, 1e-10));
        return out;
    }

    const IncomePaths inc = simulate_income(s.agents, s.market(), sim);
    const PathBundle b = simulate_equilibrium_paths(s, inc);
    out.push_back(detail::bound_check("real_clearing_paths", max_abs(b.real_residual.values()), 1e-10));
    out.push_back(detail::bound_check("financial_clearing_paths", max_abs(b.financial_residual.values()), 1e-10));
    out.push_back(detail::bound_check("self_financing_paths", max_self_financing_residual(b, s), 1e-10));

    for (std::size_t i = 0; i < 2; ++i) {
        const std::string who = "agent" + std::to_string(i + 1);
        for (std::size_t n : {5u, 10u, 20u}) {
            const auto tv = check_transversality(s, i, n, sim);
            const double gap = tv.mc_estimate - tv.closed_form;
            const double bound = 3.0 * tv.std_error + 1e-12 * std::abs(tv.closed_form);
            out.push_back(detail::bound_check("transversality_" + who + "_n" + std::to_string(n), gap, bound));
        }
        const auto mg = check_value_martingale(s, i, 20, sim, 0.0);
        out.push_back(detail::bound_check("martingale_" + who + "_n20", mg.mean_mn - mg.m0,
                                          3.0 * mg.std_error + 1e-12 * std::abs(mg.m0)));
    }
    return out;
}

} // namespace radner
