#include <gtest/gtest.h>

#include <random>

#include "radner/analysis.hpp"
#include "test_support.hpp"

using namespace radner;
using radner::testing::pair_with;
using radner::testing::reference_agents;

TEST(SweepLambda, RegimesAndValues) {
    std::vector<double> grid;
    for (int k = 19; k >= 0; --k) grid.push_back(0.05 * k);
    const auto rows = sweep_lambda(reference_agents(), grid);
    ASSERT_EQ(rows.size(), grid.size());
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i - 1].param, rows[i].param);
    for (const auto& row : rows) {
        EXPECT_LE(row.r_lo, row.r_mid);
        EXPECT_LE(row.r_mid, row.r_hi);
        if (row.param < 0.5 - 1e-12) {
            EXPECT_EQ(row.regime, Regime::Agent1Buys) << row.param;
            EXPECT_EQ(row.r_lo, row.r_hi);
        } else {
            EXPECT_EQ(row.regime, Regime::NoTrade) << row.param;
        }
    }
    EXPECT_NEAR(rows[0].r_mid, 0.2, 1e-15);
    EXPECT_NEAR(rows[2].r_mid, 0.198, 1e-15);
    EXPECT_NEAR(rows[10].r_lo, 0.15, 1e-15);
    EXPECT_NEAR(rows[10].r_hi, 0.15, 1e-15);
}

TEST(SweepLambda, EqualRiskAversionRateIsNonConstantWithFlatStart) {
    const auto rows = sweep_lambda(reference_agents(), {0.0, 0.1, 0.2});
    EXPECT_GT(rows[0].r_mid - rows[2].r_mid, 1e-3);
    const auto sens = rate_sensitivity(reference_agents(), 0.0);
    EXPECT_NEAR(sens.analytic, 0.0, 1e-15);
    EXPECT_NEAR(sens.finite_difference, 0.0, 1e-9);
}

TEST(RateSensitivity, SignFollowsRiskAversionOrder) {
    const auto up = rate_sensitivity(pair_with(1.0, 0.1, 2.0, 0.3), 0.0);
    EXPECT_GT(up.analytic, 0.0);
    const double r0 = cts_trade_rate_formula(pair_with(1.0, 0.1, 2.0, 0.3), 0.0);
    EXPECT_NEAR(r0, 0.25 / 1.5, 1e-15);
    const auto down = rate_sensitivity(pair_with(2.0, 0.1, 1.0, 0.3), 0.0);
    EXPECT_LT(down.analytic, 0.0);
}

TEST(RateSensitivity, AnalyticMatchesCentralDifference) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 200) {
        const Agents ag = pair_with(0.3 + 3 * u(rng), 0.01 + 0.5 * u(rng), 0.3 + 3 * u(rng), 0.01 + 0.5 * u(rng));
        const double lam = 0.5 * u(rng);
        if (solve_cts(ag, lam).regime == Regime::NoTrade) continue;
        const auto s = rate_sensitivity(ag, lam);
        if (std::abs(s.analytic) < 1e-3) continue;
        EXPECT_LE(std::abs(s.finite_difference - s.analytic), 1e-6 * std::abs(s.analytic));
        ++checked;
    }
}

TEST(RateSensitivity, MirroredRegimeUsesSwappedFormula) {
    const Agents ag = pair_with(1.0, 0.1, 2.0, 0.3);
    const auto a = rate_sensitivity(ag, 0.1);
    const auto b = rate_sensitivity(swapped(ag), 0.1);
    EXPECT_NEAR(a.analytic, b.analytic, 1e-15);
}

TEST(RateSensitivity, NoTradeIsRegimeMismatch) {
    EXPECT_THROW(rate_sensitivity(pair_with(1, 0.2, 1, 0.21), 0.1), RegimeMismatch);
}

TEST(SweepDelta, ConvergesToContinuousRate) {
    const std::vector<double> deltas = {0.5, 0.25, 0.1, 0.01, 1e-3, 1e-4};
    const auto sweep = sweep_delta(reference_agents(), 0.1, deltas);
    EXPECT_NEAR(sweep.r0, 0.198, 1e-15);
    EXPECT_NEAR(sweep.rows[0].r_mid, 0.20833759246956455, 1e-13);
    for (std::size_t i = 1; i < sweep.distance.size(); ++i) EXPECT_LT(sweep.distance[i], sweep.distance[i - 1]);
    EXPECT_LE(sweep.distance.back(), 1e-4);
    EXPECT_NEAR(sweep.order, 1.0, 0.05);
    for (const auto& row : sweep.rows) {
        EXPECT_LE(std::abs(rate_equation_residual(reference_agents(), 0.1, row.param, row.r_mid)), 1e-12);
    }
    EXPECT_LE(std::abs(rate_equation_residual(reference_agents(), 0.1, 0.0, sweep.r0)), 1e-12);
}

TEST(SweepDelta, NoTradeLimitIsRegimeMismatch) {
    EXPECT_THROW(sweep_delta(pair_with(1, 0.2, 1, 0.21), 0.1, {0.5}), RegimeMismatch);
}
