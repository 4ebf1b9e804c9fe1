#pragma once

// Configuration documents and result serialization (JSON for structured
// results, CSV for path and sweep tables).

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radner/analysis.hpp"
#include "radner/equilibrium.hpp"
#include "radner/simulate.hpp"

namespace radner {

using json = nlohmann::json;

struct Config {
    Agents agents{};
    double lambda = 0.0;
    std::optional<double> delta; // absent: continuous time
    std::optional<SimConfig> sim;

    MarketParams market() const {
        if (delta) return {lambda, Discrete{*delta}};
        return {lambda, Continuous{}};
    }

    friend bool operator==(const Config&, const Config&) = default;
};

namespace detail {

class FieldReader {
public:
    explicit FieldReader(std::vector<std::string>& problems) : problems_(problems) {}

    double number(const json& obj, const char* key, const std::string& path, std::optional<double> fallback = {}) {
        const std::string where = path.empty() ? key : path + "." + key;
        if (!obj.contains(key)) {
            if (fallback) return *fallback;
            problems_.push_back(where + " is required");
            return 0.0;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) {
            problems_.push_back(where + " must be a number");
            return 0.0;
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) problems_.push_back(where + " must be finite");
        return x;
    }

    std::uint64_t count(const json& obj, const char* key, const std::string& path, std::uint64_t fallback) {
        const std::string where = path + "." + key;
        if (!obj.contains(key)) return fallback;
        const json& v = obj.at(key);
        if (!v.is_number_unsigned()) {
            problems_.push_back(where + " must be a non-negative integer");
            return 0;
        }
        return v.get<std::uint64_t>();
    }

private:
    std::vector<std::string>& problems_;
};

} // namespace detail

/// Parses and validates a configuration document. Every violated invariant is
/// reported with its field path in a single ValidationError.
inline Config load_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed configuration: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("configuration must be a JSON object");

    std::vector<std::string> problems;
    detail::FieldReader read(problems);
    Config cfg;

    if (!doc.contains("agents") || !doc["agents"].is_array() || doc["agents"].size() != 2) {
        problems.push_back("agents must be a list of exactly 2 agents");
    } else {
        for (std::size_t i = 0; i < 2; ++i) {
            const json& a = doc["agents"][i];
            const std::string path = "agents[" + std::to_string(i) + "]";
            if (!a.is_object()) {
                problems.push_back(path + " must be an object");
                continue;
            }
            AgentParams& ag = cfg.agents[i];
            ag.alpha = read.number(a, "alpha", path);
            ag.beta = read.number(a, "beta", path);
            ag.mu = read.number(a, "mu", path);
            ag.sigma = read.number(a, "sigma", path);
            ag.theta0 = read.number(a, "theta0", path);
            ag.y0 = read.number(a, "y0", path);
            auto p = agent_problems(ag, path);
            problems.insert(problems.end(), p.begin(), p.end());
            if (p.empty() && ag.alpha > 0.0 && !(effective_discount(ag).value > 0.0))
                problems.push_back(path + " effective discount beta + alpha*mu - alpha^2*sigma^2/2 must be > 0");
        }
        const double sum = cfg.agents[0].theta0 + cfg.agents[1].theta0;
        if (!(std::abs(sum - 1.0) <= 1e-12)) problems.push_back("theta0 sum must equal 1 (agents[0].theta0 + agents[1].theta0)");
    }

    cfg.lambda = read.number(doc, "lambda", "");
    if (doc.contains("delta") && !doc["delta"].is_null()) cfg.delta = read.number(doc, "delta", "");
    auto m = market_problems(cfg.market());
    problems.insert(problems.end(), m.begin(), m.end());

    if (doc.contains("sim") && !doc["sim"].is_null()) {
        const json& s = doc["sim"];
        if (!s.is_object()) {
            problems.push_back("sim must be an object");
        } else {
            SimConfig sc;
            sc.n_paths = read.count(s, "n_paths", "sim", sc.n_paths);
            sc.n_steps = read.count(s, "n_steps", "sim", sc.n_steps);
            sc.seed = read.count(s, "seed", "sim", sc.seed);
            sc.rho = read.number(s, "rho", "sim", 0.0);
            if (sc.n_paths < 1) problems.push_back("sim.n_paths must be >= 1");
            if (sc.n_steps < 1) problems.push_back("sim.n_steps must be >= 1");
            if (!(std::abs(sc.rho) <= 1.0)) problems.push_back("sim.rho must be in [-1,1]");
            cfg.sim = sc;
        }
    }

    if (!problems.empty()) throw ValidationError(std::move(problems));
    return cfg;
}

inline Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open configuration file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config_text(buf.str());
}

inline json to_json(const AgentParams& a) {
    return {{"alpha", a.alpha}, {"beta", a.beta}, {"mu", a.mu}, {"sigma", a.sigma}, {"theta0", a.theta0}, {"y0", a.y0}};
}

inline json to_json(const Config& c) {
    json doc = {{"agents", {to_json(c.agents[0]), to_json(c.agents[1])}}, {"lambda", c.lambda}};
    if (c.delta) doc["delta"] = *c.delta;
    if (c.sim)
        doc["sim"] = {{"n_paths", c.sim->n_paths}, {"n_steps", c.sim->n_steps}, {"seed", c.sim->seed}, {"rho", c.sim->rho}};
    return doc;
}

inline json to_json(const EquilibriumSolution& s) {
    const RateInterval iv = s.rate_interval();
    json doc;
    doc["regime"] = std::string(to_string(s.regime));
    doc["r_market"] = {{"lo", iv.lo}, {"mid", iv.mid()}, {"hi", iv.hi}, {"unique", std::holds_alternative<double>(s.market_rate)}};
    doc["r1"] = s.shadow_rate_1;
    doc["r2"] = s.shadow_rate_2;
    doc["trade_rate"] = s.trade_per_step;
    doc["lambda"] = s.lambda;
    if (const auto* d = std::get_if<Discrete>(&s.grid))
        doc["delta"] = d->delta;
    else
        doc["delta"] = nullptr;
    doc["agents"] = {to_json(s.agents[0]), to_json(s.agents[1])};
    return doc;
}

inline EquilibriumSolution solution_from_json(const json& doc) {
    try {
        EquilibriumSolution s;
        s.regime = regime_from_string(doc.at("regime").get<std::string>());
        const json& m = doc.at("r_market");
        if (m.at("unique").get<bool>())
            s.market_rate = m.at("lo").get<double>();
        else
            s.market_rate = RateInterval{m.at("lo").get<double>(), m.at("hi").get<double>()};
        s.shadow_rate_1 = doc.at("r1").get<double>();
        s.shadow_rate_2 = doc.at("r2").get<double>();
        s.trade_per_step = doc.at("trade_rate").get<double>();
        s.lambda = doc.at("lambda").get<double>();
        if (doc.at("delta").is_null())
            s.grid = Continuous{};
        else
            s.grid = Discrete{doc.at("delta").get<double>()};
        for (std::size_t i = 0; i < 2; ++i) {
            const json& a = doc.at("agents").at(i);
            s.agents[i] = {a.at("alpha").get<double>(), a.at("beta").get<double>(), a.at("mu").get<double>(),
                           a.at("sigma").get<double>(), a.at("theta0").get<double>(), a.at("y0").get<double>()};
        }
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed solution document: ") + e.what());
    }
}

inline json to_json(const BankVerdict& v) {
    if (const auto* inf = std::get_if<Infeasible>(&v)) return {{"verdict", "infeasible"}, {"reason", inf->reason}};
    return {{"verdict", "no_trade_only"}, {"rate", std::get<NoTradeOnly>(v).rate}};
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline void write_paths_csv(std::ostream& os, const PathBundle& b) {
    os << "path,step,t,Y1,Y2,c1,c2,X1,X2,theta1,theta2,real_residual,fin_residual\n";
    std::string line;
    for (std::size_t p = 0; p < b.n_paths(); ++p) {
        for (std::size_t n = 0; n < b.times.size(); ++n) {
            line.clear();
            line += std::to_string(p);
            line += ',';
            line += std::to_string(n);
            for (double v : {b.times[n], b.income[0](p, n), b.income[1](p, n), b.consumption[0](p, n),
                             b.consumption[1](p, n), b.wealth[0](p, n), b.wealth[1](p, n), b.holdings[0](p, n),
                             b.holdings[1](p, n), b.real_residual(p, n), b.financial_residual(p, n)}) {
                line += ',';
                line += format_number(v);
            }
            line += '\n';
            os << line;
        }
    }
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "param,regime,r_lo,r_mid,r_hi,r1,r2,trade_rate\n";
    for (const auto& r : rows) {
        os << format_number(r.param) << ',' << to_string(r.regime) << ',' << format_number(r.r_lo) << ','
           << format_number(r.r_mid) << ',' << format_number(r.r_hi) << ',' << format_number(r.r1) << ','
           << format_number(r.r2) << ',' << format_number(r.trade_rate) << '\n';
    }
}

/// Parses "start:stop:step" (stop included up to rounding) or a comma list.
inline std::vector<double> parse_grid(const std::string& text) {
    auto to_double = [&](const std::string& s) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ParseError("bad number '" + s + "' in grid '" + text + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') == std::string::npos) {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(to_double(item));
        if (out.empty()) throw ParseError("empty grid");
        return out;
    }
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ParseError("grid must be start:stop:step, got '" + text + "'");
    const double start = to_double(parts[0]);
    const double stop = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw ParseError("grid needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
}

} // namespace radner
