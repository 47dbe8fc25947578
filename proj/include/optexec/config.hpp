#pragma once

// CLI-facing configuration: a single JSON document with sections
// market / scenarios / solver / run. The market section mirrors the
// reference parameter-table field names; when it is absent the market is
// built from the named preset case.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "optexec/market.hpp"
#include "optexec/solver.hpp"

namespace optexec {

struct ScenarioConfig {
    std::size_t paths = 100000;        // scenario count used for solving
    std::uint64_t seed = 271828;
    std::size_t eval_paths = 1000000;  // scenario count used for reporting
    std::uint64_t eval_seed = 314159;
};

struct RunConfig {
    char market_case = 'a';
    std::vector<double> lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> lambda_vars = {0.0, 1e-7, 1e-6, 1e-5, 1e-4};
    double alpha = 0.3;
};

struct Config {
    MarketParams market;
    ScenarioConfig scenarios;
    SolverConfig solver;
    RunConfig run;
    bool market_from_preset = true;
};

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& field) {
    throw std::invalid_argument("config: missing or invalid field '" + field + "' in section '" +
                                where + "'");
}

inline double require_number(const nlohmann::json& j, const std::string& where,
                             const std::string& field) {
    if (!j.contains(field) || !j[field].is_number()) schema_error(where, field);
    return j[field].get<double>();
}

inline std::vector<double> require_array(const nlohmann::json& j, const std::string& where,
                                         const std::string& field) {
    if (!j.contains(field) || !j[field].is_array()) schema_error(where, field);
    std::vector<double> out;
    for (const auto& v : j[field]) {
        if (!v.is_number()) schema_error(where, field);
        out.push_back(v.get<double>());
    }
    return out;
}

inline MarketParams parse_market(const nlohmann::json& j) {
    MarketParams p;
    p.tau = require_array(j, "market", "tau");
    p.m = static_cast<int>(p.tau.size());
    p.sigma = require_array(j, "market", "sigma");
    p.epsilon = require_array(j, "market", "epsilon");
    p.eta = require_array(j, "market", "eta");
    p.gamma = require_number(j, "market", "gamma");
    p.d0 = require_number(j, "market", "d0");
    p.nu = require_array(j, "market", "nu");
    p.alpha = require_number(j, "market", "alpha");
    p.s0 = require_number(j, "market", "s0");
    p.validate();
    return p;
}

}  // namespace detail

inline Config parse_config(const nlohmann::json& j) {
    Config c;
    if (j.contains("run")) {
        const auto& r = j["run"];
        if (r.contains("case")) {
            const auto s = r["case"].get<std::string>();
            if (s != "a" && s != "b") detail::schema_error("run", "case");
            c.run.market_case = s[0];
        }
        if (r.contains("lambdas")) c.run.lambdas = detail::require_array(r, "run", "lambdas");
        if (r.contains("lambda_vars"))
            c.run.lambda_vars = detail::require_array(r, "run", "lambda_vars");
        if (r.contains("alpha")) c.run.alpha = detail::require_number(r, "run", "alpha");
    }
    if (j.contains("market")) {
        c.market = detail::parse_market(j["market"]);
        c.market_from_preset = false;
    } else {
        c.market = make_preset(c.run.market_case);
        c.market.alpha = c.run.alpha;
    }
    if (j.contains("scenarios")) {
        const auto& s = j["scenarios"];
        if (s.contains("paths")) c.scenarios.paths = s["paths"].get<std::size_t>();
        if (s.contains("seed")) c.scenarios.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("eval_paths")) c.scenarios.eval_paths = s["eval_paths"].get<std::size_t>();
        if (s.contains("eval_seed")) c.scenarios.eval_seed = s["eval_seed"].get<std::uint64_t>();
        if (c.scenarios.paths < 1 || c.scenarios.eval_paths < 1)
            detail::schema_error("scenarios", "paths");
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (s.contains("max_iters")) c.solver.max_iters = s["max_iters"].get<int>();
        if (s.contains("rel_tol")) c.solver.rel_tol = detail::require_number(s, "solver", "rel_tol");
        if (s.contains("patience")) c.solver.patience = s["patience"].get<int>();
        if (s.contains("initial_level"))
            c.solver.initial_level = detail::require_number(s, "solver", "initial_level");
        if (s.contains("level_shrink"))
            c.solver.level_shrink = detail::require_number(s, "solver", "level_shrink");
        if (s.contains("restarts")) c.solver.restarts = s["restarts"].get<int>();
        if (s.contains("seed")) c.solver.seed = s["seed"].get<std::uint64_t>();
        c.solver.validate();
    }
    return c;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config: parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

/// Rebuild the market section from a preset case, keeping everything else.
inline void apply_case_override(Config& c, char market_case) {
    c.run.market_case = market_case;
    c.market = make_preset(market_case);
    c.market.alpha = c.run.alpha;
    c.market_from_preset = true;
}

}  // namespace optexec
