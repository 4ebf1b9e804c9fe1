#pragma once

// Monte Carlo income paths, closed-form equilibrium paths on top of them, and
// the numerical verifiers: market clearing, transversality and the value
// process (super)martingale property.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "radner/equilibrium.hpp"
#include "radner/policy.hpp"

namespace radner {

struct SimConfig {
    std::size_t n_paths = 1000;
    std::size_t n_steps = 100;
    std::uint64_t seed = 42;
    double rho = 0.0;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Dense row-major (path x step) array.
class PathMatrix {
public:
    PathMatrix() = default;
    PathMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    double& operator()(std::size_t path, std::size_t step) { return data_[path * cols_ + step]; }
    double operator()(std::size_t path, std::size_t step) const { return data_[path * cols_ + step]; }

    std::span<double> row(std::size_t path) { return {data_.data() + path * cols_, cols_}; }
    std::span<const double> row(std::size_t path) const { return {data_.data() + path * cols_, cols_}; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> values() const { return data_; }

    friend bool operator==(const PathMatrix&, const PathMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct IncomePaths {
    Agents agents{};
    double delta = 0.0;
    SimConfig config;
    std::array<PathMatrix, 2> income;
};

struct PathBundle {
    std::vector<double> times;
    std::array<PathMatrix, 2> income;
    std::array<PathMatrix, 2> consumption;
    std::array<PathMatrix, 2> wealth;
    std::array<PathMatrix, 2> holdings;
    PathMatrix real_residual;
    PathMatrix financial_residual;

    std::size_t n_paths() const { return real_residual.rows(); }
    std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }
};

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Generator for one path: its stream depends only on (seed, path).
inline std::mt19937_64 path_rng(std::uint64_t seed, std::size_t path) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(0xa5a5a5a5ULL + path)));
}

// Runs body(path) for every path on a fixed partition of worker threads.
// Each path writes only its own rows, so the result does not depend on the
// schedule.
template <class Body>
void for_each_path(std::size_t n_paths, Body&& body) {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, std::max<std::size_t>(1, n_paths / 256));
    if (workers <= 1) {
        for (std::size_t p = 0; p < n_paths; ++p) body(p);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t p = w; p < n_paths; p += workers) body(p);
        });
    }
}

inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 16) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline void require_valid(const SimConfig& cfg) {
    if (cfg.n_paths < 1) throw InvalidParams("sim.n_paths must be >= 1");
    if (cfg.n_steps < 1) throw InvalidParams("sim.n_steps must be >= 1");
    if (!(std::abs(cfg.rho) <= 1.0)) throw InvalidParams("sim.rho must be in [-1,1]");
}

} // namespace detail

/// Sample mean and its standard error, summed pairwise in index order.
inline MonteCarloEstimate mean_with_error(std::span<const double> xs) {
    MonteCarloEstimate est;
    if (xs.empty()) return est;
    const double n = static_cast<double>(xs.size());
    est.mean = detail::pairwise_sum(xs) / n;
    if (xs.size() < 2) return est;
    std::vector<double> sq(xs.size());
    std::transform(xs.begin(), xs.end(), sq.begin(), [&](double x) { return (x - est.mean) * (x - est.mean); });
    const double var = detail::pairwise_sum(sq) / (n - 1.0);
    est.std_error = std::sqrt(var / n);
    return est;
}

/// Y_{n+1} = Y_n + mu delta + sqrt(delta) sigma Z_{n+1}, with (Z_1, Z_2)
/// standard normal with correlation rho and independent across steps.
/// Deterministic in (seed, path index).
inline IncomePaths simulate_income(const Agents& agents, const MarketParams& market, const SimConfig& cfg) {
    detail::require_valid(cfg);
    const double delta = step_of(market.grid);
    if (!(delta > 0.0)) throw InvalidParams("delta must be > 0");

    IncomePaths out;
    out.agents = agents;
    out.delta = delta;
    out.config = cfg;
    const std::size_t cols = cfg.n_steps + 1;
    out.income = {PathMatrix(cfg.n_paths, cols), PathMatrix(cfg.n_paths, cols)};

    const double sq = std::sqrt(delta);
    const double rho = cfg.rho;
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    detail::for_each_path(cfg.n_paths, [&](std::size_t p) {
        auto rng = detail::path_rng(cfg.seed, p);
        std::normal_distribution<double> normal(0.0, 1.0);
        auto y1 = out.income[0].row(p);
        auto y2 = out.income[1].row(p);
        y1[0] = agents[0].y0;
        y2[0] = agents[1].y0;
        for (std::size_t n = 0; n < cfg.n_steps; ++n) {
            const double z1 = normal(rng);
            const double w = normal(rng);
            const double z2 = rho * z1 + rho_c * w;
            y1[n + 1] = y1[n] + agents[0].mu * delta + sq * agents[0].sigma * z1;
            y2[n + 1] = y2[n] + agents[1].mu * delta + sq * agents[1].sigma * z2;
        }
    });
    return out;
}

/// Evaluates the closed-form equilibrium policies along the income paths and
/// records both clearing residuals at every step:
///   real:      sum_i c_i delta - delta - sum_i Y_i delta + 2 l |dtheta_1| A_{n+1}
///   financial: theta_1 + theta_2 - 1
/// A_{n+1} is the buyer's shadow annuity value over (1 + l); without a trade
/// the cost term vanishes.
inline PathBundle simulate_equilibrium_paths(const EquilibriumSolution& solution, const IncomePaths& incomes) {
    const auto* grid = std::get_if<Discrete>(&solution.grid);
    if (!grid) throw MismatchedInputs("path simulation needs a discrete-time solution");
    if (grid->delta != incomes.delta) throw MismatchedInputs("solution and income paths use different time steps");
    if (solution.agents != incomes.agents) throw MismatchedInputs("solution and income paths use different agents");

    const double delta = grid->delta;
    const double lam = solution.lambda;
    const std::size_t n_paths = incomes.config.n_paths;
    const std::size_t n_steps = incomes.config.n_steps;
    const std::size_t cols = n_steps + 1;

    const std::array<PolicyContext, 2> ctx{solution.policy(0), solution.policy(1)};

    // Wealth and holdings are deterministic; evaluate them once per step, one
    // step past the horizon so the last trade is defined.
    std::array<std::vector<double>, 2> wealth, holdings;
    for (std::size_t i = 0; i < 2; ++i) {
        wealth[i].resize(cols + 1);
        holdings[i].resize(cols + 1);
        for (std::size_t n = 0; n <= cols; ++n) {
            wealth[i][n] = optimal_wealth_discrete(ctx[i], static_cast<long long>(n));
            holdings[i][n] = holdings_of(ctx[i], wealth[i][n]);
        }
    }
    std::vector<double> cost(cols, 0.0);
    for (std::size_t n = 0; n < cols; ++n) {
        const double d1 = holdings[0][n + 1] - holdings[0][n];
        double price = 0.0;
        if (d1 > 0.0) price = solution.annuity_value(0) / (1.0 + lam);
        else if (d1 < 0.0) price = solution.annuity_value(1) / (1.0 + lam);
        cost[n] = 2.0 * lam * std::abs(d1) * price;
    }

    PathBundle b;
    b.times.resize(cols);
    for (std::size_t n = 0; n < cols; ++n) b.times[n] = static_cast<double>(n) * delta;
    for (std::size_t i = 0; i < 2; ++i) {
        b.income[i] = incomes.income[i];
        b.consumption[i] = PathMatrix(n_paths, cols);
        b.wealth[i] = PathMatrix(n_paths, cols);
        b.holdings[i] = PathMatrix(n_paths, cols);
    }
    b.real_residual = PathMatrix(n_paths, cols);
    b.financial_residual = PathMatrix(n_paths, cols);

    detail::for_each_path(n_paths, [&](std::size_t p) {
        for (std::size_t n = 0; n < cols; ++n) {
            double total_c = 0.0;
            double total_y = 0.0;
            for (std::size_t i = 0; i < 2; ++i) {
                const double y = b.income[i](p, n);
                const double c = optimal_consumption_discrete(ctx[i], wealth[i][n], y);
                b.consumption[i](p, n) = c;
                b.wealth[i](p, n) = wealth[i][n];
                b.holdings[i](p, n) = holdings[i][n];
                total_c += c;
                total_y += y;
            }
            b.real_residual(p, n) = total_c * delta - delta - total_y * delta + cost[n];
            b.financial_residual(p, n) = holdings[0][n] + holdings[1][n] - 1.0;
        }
    });
    return b;
}

inline double max_abs(std::span<const double> xs) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

/// Largest violation over all paths and steps n < N of the self-financing
/// condition (theta_{n+1} - theta_n) A_i = (Y_n - c_n + theta_n) delta.
inline double max_self_financing_residual(const PathBundle& b, const EquilibriumSolution& solution) {
    const double delta = step_of(solution.grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const double a = solution.annuity_value(i);
        for (std::size_t p = 0; p < b.n_paths(); ++p) {
            for (std::size_t n = 0; n + 1 < b.times.size(); ++n) {
                const double lhs = (b.holdings[i](p, n + 1) - b.holdings[i](p, n)) * a;
                const double rhs = (b.income[i](p, n) - b.consumption[i](p, n) + b.holdings[i](p, n)) * delta;
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
    }
    return worst;
}

struct TransversalityCheck {
    double closed_form = 0.0;
    double mc_estimate = 0.0;
    double std_error = 0.0;
};

/// E[exp(-beta t_n - alpha r X_n - alpha Y_n)] under the optimal policy:
/// (1 + r delta)^{-n} exp(-alpha r X_0 - alpha Y_0).
inline double transversality_closed_form(const PolicyContext& ctx, long long n) {
    const double delta = step_of(ctx.grid);
    const double r = ctx.shadow_rate;
    const double x0 = ctx.agent.theta0 / r;
    return std::exp(-static_cast<double>(n) * std::log1p(r * delta) - ctx.agent.alpha * (r * x0 + ctx.agent.y0));
}

/// Compares the Monte Carlo transversality expectation at step n with its
/// closed form for agent `agent` (0 or 1).
inline TransversalityCheck check_transversality(const EquilibriumSolution& solution, std::size_t agent,
                                                std::size_t n, SimConfig cfg) {
    const PolicyContext ctx = solution.policy(agent);
    const double delta = step_of(solution.grid);
    cfg.n_steps = std::max<std::size_t>(n, 1);
    const IncomePaths inc = simulate_income(solution.agents, solution.market(), cfg);

    const auto& ag = ctx.agent;
    const double r = ctx.shadow_rate;
    const double x_n = optimal_wealth_discrete(ctx, static_cast<long long>(n));
    const double t_n = static_cast<double>(n) * delta;
    std::vector<double> samples(cfg.n_paths);
    for (std::size_t p = 0; p < cfg.n_paths; ++p)
        samples[p] = std::exp(-ag.beta * t_n - ag.alpha * r * x_n - ag.alpha * inc.income[agent](p, n));
    const auto est = mean_with_error(samples);
    return {transversality_closed_form(ctx, static_cast<long long>(n)), est.mean, est.std_error};
}

struct MartingaleCheck {
    double m0 = 0.0;
    double mean_mn = 0.0;
    double std_error = 0.0;
};

/// Value process M_n = -sum_{k<n} e^{-beta t_k - alpha c_k} + e^{-beta t_n} J(X_n, Y_n)
/// along consumption c_k = c_opt(X_k, Y_k) + eps, wealth following
/// X_{k+1} = X_k + (X_k r + Y_k - c_k) delta from X_0 = theta0 / r.
/// A martingale at eps = 0 and a strict supermartingale otherwise.
inline MartingaleCheck check_value_martingale(const EquilibriumSolution& solution, std::size_t agent, std::size_t n,
                                              SimConfig cfg, double eps) {
    const PolicyContext ctx = solution.policy(agent);
    const double delta = step_of(solution.grid);
    cfg.n_steps = std::max<std::size_t>(n, 1);
    const IncomePaths inc = simulate_income(solution.agents, solution.market(), cfg);

    const auto& ag = ctx.agent;
    const double r = ctx.shadow_rate;
    const double x0 = ag.theta0 / r;
    std::vector<double> samples(cfg.n_paths);
    detail::for_each_path(cfg.n_paths, [&](std::size_t p) {
        const auto y = inc.income[agent].row(p);
        double x = x0;
        double running = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) * delta;
            const double c = optimal_consumption_discrete(ctx, x, y[k]) + eps;
            running += std::exp(-ag.beta * t - ag.alpha * c);
            x += (x * r + y[k] - c) * delta;
        }
        const double t_n = static_cast<double>(n) * delta;
        samples[p] = -running + std::exp(-ag.beta * t_n) * value_discrete(ctx, x, y[n]);
    });
    const auto est = mean_with_error(samples);
    return {value_discrete(ctx, x0, ag.y0), est.mean, est.std_error};
}

} // namespace radner
