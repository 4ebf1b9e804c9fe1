#include <gtest/gtest.h>

#include <cstdint>
#include <numeric>
#include <random>

#include "radner/equilibrium.hpp"
#include "test_support.hpp"

using namespace radner;
using radner::testing::pair_with;
using radner::testing::reference_agents;
using radner::testing::rel_err;

namespace {

// Exact rational arithmetic for the continuous-time rate formula.
struct Rational {
    std::int64_t num;
    std::int64_t den;

    Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) { normalize(); }
    void normalize() {
        const std::int64_t g = std::gcd(num, den);
        num /= g;
        den /= g;
        if (den < 0) {
            num = -num;
            den = -den;
        }
    }
    friend Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
    friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
    friend Rational operator/(Rational a, Rational b) { return {a.num * b.den, a.den * b.num}; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// alpha_1 = alpha_2 turns the rate equation into a quadratic in u = r delta:
// (1 + u/(1-l))(1 + u/(1+l)) = e^{(bt1 + bt2) delta}.
double quadratic_oracle_rate(double bt1, double bt2, double lambda, double delta) {
    const double k = std::expm1((bt1 + bt2) * delta) * (1.0 - lambda * lambda);
    const double u = k / (1.0 + std::sqrt(1.0 + k));
    return u / delta;
}

} // namespace

TEST(SolveCts, TradeCaseMatchesRationalOracle) {
    const Rational bt1(1, 10), bt2(3, 10), lam(1, 10);
    const Rational r_exact = (bt1 + bt2) / (Rational(1) / (Rational(1) + lam) + Rational(1) / (Rational(1) + Rational(-1) * lam));
    ASSERT_EQ(r_exact.num, 99);
    ASSERT_EQ(r_exact.den, 500);

    const auto s = solve_cts(reference_agents(), 0.1);
    EXPECT_EQ(s.regime, Regime::Agent1Buys);
    ASSERT_TRUE(std::holds_alternative<double>(s.market_rate));
    EXPECT_NEAR(std::get<double>(s.market_rate), r_exact.value(), 1e-14);
    EXPECT_NEAR(s.shadow_rate_1, 0.18, 1e-14);
    EXPECT_NEAR(s.shadow_rate_2, 0.22, 1e-14);
    EXPECT_NEAR(s.trade_per_step, 0.08, 1e-14);
}

TEST(SolveCts, NoTradeInterval) {
    const auto s = solve_cts(pair_with(1, 0.2, 1, 0.21), 0.1);
    EXPECT_EQ(s.regime, Regime::NoTrade);
    const auto iv = std::get<RateInterval>(s.market_rate);
    EXPECT_NEAR(iv.lo, 0.189, 1e-15);
    EXPECT_NEAR(iv.hi, 0.22, 1e-15);
    EXPECT_EQ(s.trade_per_step, 0.0);
    EXPECT_DOUBLE_EQ(s.shadow_rate_1, 0.2);
    EXPECT_DOUBLE_EQ(s.shadow_rate_2, 0.21);
}

TEST(SolveCts, FrictionlessEqualRiskAversionAveragesDiscounts) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.01, 0.5);
    for (int k = 0; k < 100; ++k) {
        const double b1 = u(rng), b2 = u(rng), a = 0.3 + u(rng);
        const auto s = solve_cts(pair_with(a, b1, a, b2), 0.0);
        EXPECT_NEAR(s.rate_interval().mid(), 0.5 * (b1 + b2), 1e-14);
    }
}

TEST(SolveCts, RejectsInvalidInputs) {
    EXPECT_THROW(solve_cts(reference_agents(), 1.0), InvalidParams);
    EXPECT_THROW(solve_cts(reference_agents(), -0.1), InvalidParams);
    Agents bad = reference_agents();
    bad[0].beta = -1.0;
    EXPECT_THROW(solve_cts(bad, 0.1), InvalidParams);
}

TEST(SolveDiscrete, TradeCaseMatchesQuadraticOracle) {
    const auto s = solve_discrete(reference_agents(), 0.1, 0.5);
    EXPECT_EQ(s.regime, Regime::Agent1Buys);
    const double r = std::get<double>(s.market_rate);
    const double oracle = quadratic_oracle_rate(0.1, 0.3, 0.1, 0.5);
    EXPECT_NEAR(oracle, 0.20833759246956455, 1e-15); // 40-digit evaluation
    EXPECT_NEAR(r, oracle, 1e-13);
    EXPECT_NEAR(s.trade_per_step, 0.040479353464025371, 1e-13);
    EXPECT_NEAR(s.shadow_rate_1 * 1.1, r, 1e-15);
    EXPECT_NEAR(s.shadow_rate_2 * 0.9, r, 1e-15);
    EXPECT_LE(std::abs(rate_equation_residual(s.agents, 0.1, 0.5, r)), 1e-12);
}

TEST(SolveDiscrete, FrictionlessClosedForm) {
    const auto s = solve_discrete(reference_agents(), 0.0, 1.0);
    EXPECT_NEAR(s.rate_interval().mid(), std::expm1(0.2), 1e-13);
}

TEST(SolveDiscrete, NoTradeInterval) {
    const auto s = solve_discrete(pair_with(1, 0.2, 1, 0.21), 0.1, 1.0);
    EXPECT_EQ(s.regime, Regime::NoTrade);
    EXPECT_NEAR(s.shadow_rate_1, 0.22140275816016983, 1e-15);
    EXPECT_NEAR(s.shadow_rate_2, 0.23367805995674325, 1e-15);
    const auto iv = std::get<RateInterval>(s.market_rate);
    EXPECT_NEAR(iv.lo, 0.21031025396106893, 1e-15);
    EXPECT_NEAR(iv.hi, 0.24354303397618682, 1e-15);
    EXPECT_EQ(s.trade_per_step, 0.0);
}

TEST(SolveDiscrete, RejectsBadStep) {
    EXPECT_THROW(solve_discrete(reference_agents(), 0.1, 0.0), InvalidParams);
    EXPECT_THROW(solve_discrete(reference_agents(), 0.1, -1.0), InvalidParams);
}

class RandomEconomies : public ::testing::Test {
protected:
    std::mt19937_64 rng{2024};
    std::uniform_real_distribution<double> unit{0.0, 1.0};

    Agents draw() {
        return pair_with(0.3 + 3 * unit(rng), 0.01 + 0.5 * unit(rng), 0.3 + 3 * unit(rng), 0.01 + 0.5 * unit(rng));
    }
};

TEST_F(RandomEconomies, TradeSolutionsSatisfyEquilibriumConditions) {
    int trades = 0;
    for (int k = 0; k < 2000; ++k) {
        const Agents ag = draw();
        const double lam = 0.6 * unit(rng);
        const TimeGrid grid = unit(rng) < 0.5 ? TimeGrid{Continuous{}} : TimeGrid{Discrete{0.01 + 2 * unit(rng)}};
        const auto s = solve(ag, {lam, grid});
        const auto c = check_solution(s);
        EXPECT_LE(std::abs(c.wealth_clearing), 1e-12);
        EXPECT_LE(std::abs(c.share_clearing), 1e-12);
        EXPECT_TRUE(c.ratio_in_band);
        EXPECT_TRUE(c.ratio_on_required_edge);
        EXPECT_GT(s.shadow_rate_1, 0.0);
        EXPECT_GT(s.shadow_rate_2, 0.0);
        if (s.regime == Regime::NoTrade) {
            const auto iv = s.rate_interval();
            EXPECT_LE(iv.lo, iv.hi);
            EXPECT_EQ(s.trade_per_step, 0.0);
            continue;
        }
        ++trades;
        const double r = std::get<double>(s.market_rate);
        EXPECT_EQ(s.trade_per_step > 0, s.regime == Regime::Agent1Buys);
        const Agents oriented = s.regime == Regime::Agent1Buys ? ag : swapped(ag);
        if (const auto* d = std::get_if<Discrete>(&grid)) {
            EXPECT_LE(std::abs(rate_equation_residual(oriented, lam, d->delta, r)), 1e-12);
            const auto br = discrete_rate_bracket(oriented, lam, d->delta);
            EXPECT_LT(br.lo, r);
            EXPECT_LT(r, br.hi);
        }
    }
    EXPECT_GT(trades, 200);
}

TEST_F(RandomEconomies, RoleSwapMirrorsSolution) {
    for (int k = 0; k < 500; ++k) {
        const Agents ag = draw();
        const double lam = 0.5 * unit(rng);
        const MarketParams m{lam, unit(rng) < 0.5 ? TimeGrid{Continuous{}} : TimeGrid{Discrete{0.05 + unit(rng)}}};
        const auto a = solve(ag, m);
        const auto b = solve(swapped(ag), m);
        EXPECT_EQ(b.regime, mirrored(a.regime));
        EXPECT_NEAR(a.rate_interval().lo, b.rate_interval().lo, 1e-14);
        EXPECT_NEAR(a.rate_interval().hi, b.rate_interval().hi, 1e-14);
        EXPECT_NEAR(a.shadow_rate_1, b.shadow_rate_2, 1e-14);
        EXPECT_NEAR(a.shadow_rate_2, b.shadow_rate_1, 1e-14);
        // Agent 1's purchases are agent 2's sales in the swapped economy.
        const double b_agent2_trade = is_discrete(m.grid) ? trade_per_step(b.policy(1)) : trade_rate_cts(b.policy(1));
        EXPECT_NEAR(a.trade_per_step, b_agent2_trade, 1e-13);
        EXPECT_NEAR(a.trade_per_step, -b.trade_per_step, 1e-12);
    }
}

TEST_F(RandomEconomies, FrictionlessDiscreteMatchesWeightedMeanFormula) {
    for (int k = 0; k < 200; ++k) {
        const Agents ag = draw();
        const double delta = 0.01 + 2 * unit(rng);
        const double w1 = 1 / ag[0].alpha, w2 = 1 / ag[1].alpha;
        const double h = (w1 * effective_discount(ag[0]).value + w2 * effective_discount(ag[1]).value) / (w1 + w2);
        EXPECT_NEAR(solve_discrete(ag, 0.0, delta).rate_interval().mid(), std::expm1(h * delta) / delta, 1e-12);
        EXPECT_NEAR(solve_cts(ag, 0.0).rate_interval().mid(), h, 1e-14);
    }
}

TEST(SolveCts, RegimeBoundaryContinuity) {
    const Agents ag = reference_agents();
    const double lam_star = (0.3 - 0.1) / (0.3 + 0.1);
    const auto at = solve_cts(ag, lam_star);
    EXPECT_EQ(at.regime, Regime::NoTrade);
    EXPECT_NEAR(at.rate_interval().lo, 0.15, 1e-15);
    EXPECT_NEAR(at.rate_interval().hi, 0.15, 1e-15);
    const auto before = solve_cts(ag, lam_star - 1e-9);
    EXPECT_EQ(before.regime, Regime::Agent1Buys);
    EXPECT_NEAR(std::get<double>(before.market_rate), 0.15, 1e-9);
    EXPECT_NEAR(before.trade_per_step, 0.0, 1e-8);
}

TEST(SolveCts, NoTradeCollapsesToPointWithoutFriction) {
    const auto s = solve_cts(pair_with(1, 0.2, 2, 0.2), 0.0);
    EXPECT_EQ(s.regime, Regime::NoTrade);
    EXPECT_DOUBLE_EQ(s.rate_interval().lo, s.rate_interval().hi);
}

TEST(WithMarketRate, PerturbedRateBreaksClearing) {
    const auto s = solve_discrete(reference_agents(), 0.1, 0.5);
    const auto p = with_market_rate(s, std::get<double>(s.market_rate) + 1e-3);
    const auto c = check_solution(p);
    EXPECT_GT(std::abs(c.share_clearing), 1e-5);
    EXPECT_TRUE(c.ratio_on_required_edge);
    EXPECT_THROW(with_market_rate(s, 0.0), InvalidParams);
}

TEST(BankCheck, DistinctDiscountsAreInfeasible) {
    const auto v = check_bank_constant_equilibrium(reference_agents(), 0.1, 1.0);
    ASSERT_TRUE(std::holds_alternative<Infeasible>(v));
    EXPECT_NE(std::get<Infeasible>(v).reason.find("r1 = r2"), std::string::npos);
}

TEST(BankCheck, EqualDiscountsGiveAutarkyRate) {
    const auto v = check_bank_constant_equilibrium(pair_with(1, 0.2, 3, 0.2), 0.1, 1.0);
    ASSERT_TRUE(std::holds_alternative<NoTradeOnly>(v));
    EXPECT_NEAR(std::get<NoTradeOnly>(v).rate, 0.22140275816016983, 1e-15);
}

TEST(BankCheck, RequiresPositiveTransactionCost) {
    EXPECT_THROW(check_bank_constant_equilibrium(reference_agents(), 0.0, 1.0), PreconditionViolated);
}

TEST(BankCheck, OracleAgreesOnRandomDraws) {
    // Independent route: with r1 = r2 = r and no trade, F1(r) = F2(r) = 0 has a
    // solution only if both autarky rates coincide.
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.01, 0.5);
    for (int k = 0; k < 100; ++k) {
        const Agents ag = pair_with(0.5 + u(rng), u(rng), 0.5 + u(rng), u(rng));
        const double delta = 0.1 + u(rng);
        const double r1 = autarky_rate(ag[0], Discrete{delta});
        const double r2 = autarky_rate(ag[1], Discrete{delta});
        const bool system_solvable = std::abs(r1 - r2) <= 1e-13;
        const auto v = check_bank_constant_equilibrium(ag, 0.05 + u(rng), delta);
        EXPECT_EQ(std::holds_alternative<NoTradeOnly>(v), system_solvable);
    }
}
