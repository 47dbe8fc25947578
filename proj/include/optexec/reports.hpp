#pragma once

// Orchestration of the numerical-comparison protocol: performance tables
// over the risk-aversion grids, the cross-framework comparison, and the
// strategy-difference sweep. Strategies are optimized on the solve sets and
// always reported on the common evaluation set, so every table cell traces
// to one disclosed (seed, N).

#include <optional>
#include <vector>

#include "optexec/config.hpp"
#include "optexec/cost.hpp"
#include "optexec/market.hpp"
#include "optexec/recourse.hpp"
#include "optexec/risk.hpp"
#include "optexec/scenario.hpp"
#include "optexec/solver.hpp"
#include "optexec/strategy.hpp"

namespace optexec {

/// Shared lazily-built state for the reporting commands.
class Workspace {
public:
    explicit Workspace(Config cfg) : cfg_(std::move(cfg)) { cfg_.market.validate(); }

    const Config& config() const { return cfg_; }
    const MarketParams& market() const { return cfg_.market; }

    /// Redistribution used throughout: implied by the risk-neutral
    /// mean-variance optimum.
    const RedistributionMatrix& beta() {
        if (!beta_) {
            const auto rn = solve_mean_variance(cfg_.market, cfg_.market.d0, 0.0);
            beta_.emplace(RedistributionMatrix::implied(Strategy{std::vector<double>(rn.y_star)}));
        }
        return *beta_;
    }

    const ScenarioSet& eval_set() {
        if (!eval_)
            eval_.emplace(generate(cfg_.market, cfg_.scenarios.eval_paths, cfg_.scenarios.eval_seed));
        return *eval_;
    }

    /// Solve set under the trader's full uncertainty estimate (nu_hat = nu).
    const ScenarioSet& solve_set_full() {
        if (!solve_full_)
            solve_full_.emplace(generate(cfg_.market, cfg_.scenarios.paths, cfg_.scenarios.seed));
        return *solve_full_;
    }

    /// Solve set of a trader who believes the demand is fixed (nu_hat = 0);
    /// same seed, so the price shocks coincide with the full solve set.
    const ScenarioSet& solve_set_price_only() {
        if (!solve_price_) {
            MarketParams believed = cfg_.market;
            std::fill(believed.nu.begin(), believed.nu.end(), 0.0);
            solve_price_.emplace(generate(believed, cfg_.scenarios.paths, cfg_.scenarios.seed));
        }
        return *solve_price_;
    }

private:
    Config cfg_;
    std::optional<RedistributionMatrix> beta_;
    std::optional<ScenarioSet> eval_;
    std::optional<ScenarioSet> solve_full_;
    std::optional<ScenarioSet> solve_price_;
};

struct CvarTableRow {
    double lambda = 0.0;
    MeanCvarSolution solution;
    RiskReport report;  // evaluated on the common evaluation set
};

/// One mean-CVaR solve per lambda. `believe_volume_uncertainty` selects the
/// solve set: true reproduces the estimated-correctly table, false the
/// zero-volume-variance one. Evaluation always uses the full-uncertainty
/// evaluation set.
inline std::vector<CvarTableRow> cvar_table(Workspace& ws, std::span<const double> lambdas,
                                            bool believe_volume_uncertainty) {
    const auto& solve_set =
        believe_volume_uncertainty ? ws.solve_set_full() : ws.solve_set_price_only();
    std::vector<CvarTableRow> rows;
    rows.reserve(lambdas.size());
    for (double lambda : lambdas) {
        CvarTableRow row;
        row.lambda = lambda;
        row.solution =
            solve_mean_cvar(ws.market(), solve_set, ws.beta(), lambda, ws.config().solver);
        row.report =
            evaluate_objective(ws.market(), ws.eval_set(), ws.beta(), row.solution.y_star, lambda);
        rows.push_back(std::move(row));
    }
    return rows;
}

struct RecourseTableRow {
    double lambda_var = 0.0;
    RiskReport report;     // phi is reported at lambda = 1 (pure CVaR column unused)
    double objective = 0.0;  // E + lambda_var * Var on the evaluation set
};

/// Recourse simulation per risk aversion on the evaluation set.
inline std::vector<RecourseTableRow> recourse_table(Workspace& ws,
                                                    std::span<const double> lambda_vars) {
    std::vector<RecourseTableRow> rows;
    rows.reserve(lambda_vars.size());
    for (double lv : lambda_vars) {
        const auto costs = recourse_costs(ws.market(), lv, ws.eval_set());
        RecourseTableRow row;
        row.lambda_var = lv;
        row.report = risk_report(costs, ws.market().alpha, 1.0);
        row.objective = row.report.mean + lv * row.report.variance;
        rows.push_back(row);
    }
    return rows;
}

struct CompareResult {
    double lambda_cvar = 1.0;
    double lambda_var = 1e-4;
    MeanCvarSolution cvar_solution;
    RiskReport report_cvar;        // mean-CVaR strategy on the evaluation set
    RiskReport report_recourse;    // mean-variance-with-recourse on the same set
    std::vector<double> grid;      // common cost grid
    std::vector<double> cdf_cvar;
    std::vector<double> cdf_recourse;
    Histogram pdf_cvar;
    Histogram pdf_recourse;
    Sd1Result sd1;                 // does the mean-CVaR cost dominate?
    double sd1_tol = 0.0;
    double std_cvar = 0.0;
    double std_recourse = 0.0;
};

/// Cross-framework comparison on a common scenario set: the mean-CVaR
/// strategy at lambda against the recourse policy at lambda_var, including
/// the first-order stochastic dominance verdict with a DKW-sized tolerance.
inline CompareResult compare_frameworks(Workspace& ws, double lambda_cvar = 1.0,
                                        double lambda_var = 1e-4, int bins = 200) {
    CompareResult r;
    r.lambda_cvar = lambda_cvar;
    r.lambda_var = lambda_var;
    r.cvar_solution = solve_mean_cvar(ws.market(), ws.solve_set_full(), ws.beta(), lambda_cvar,
                                      ws.config().solver);
    const auto costs_cvar =
        evaluate_costs(ws.market(), r.cvar_solution.y_star, ws.beta(), ws.eval_set());
    const auto costs_rec = recourse_costs(ws.market(), lambda_var, ws.eval_set());
    r.report_cvar = risk_report(costs_cvar, ws.market().alpha, lambda_cvar);
    r.report_recourse = risk_report(costs_rec, ws.market().alpha, 1.0);
    r.std_cvar = std::sqrt(r.report_cvar.variance);
    r.std_recourse = std::sqrt(r.report_recourse.variance);

    // Uniform grid over the pooled support.
    double lo = std::min(*std::min_element(costs_cvar.begin(), costs_cvar.end()),
                         *std::min_element(costs_rec.begin(), costs_rec.end()));
    double hi = std::max(*std::max_element(costs_cvar.begin(), costs_cvar.end()),
                         *std::max_element(costs_rec.begin(), costs_rec.end()));
    if (lo == hi) hi = lo + 1.0;
    r.grid.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        r.grid[static_cast<std::size_t>(b)] = lo + (hi - lo) * double(b) / double(bins);
    r.cdf_cvar = empirical_cdf(costs_cvar, r.grid);
    r.cdf_recourse = empirical_cdf(costs_rec, r.grid);
    r.pdf_cvar = histogram(costs_cvar, bins);
    r.pdf_recourse = histogram(costs_rec, bins);
    r.sd1_tol = 3.0 * dkw_band(std::min(costs_cvar.size(), costs_rec.size()));
    r.sd1 = sd1_dominates(costs_cvar, costs_rec, r.grid, r.sd1_tol);
    return r;
}

struct StrategyDeltaRow {
    double lambda = 0.0;
    std::vector<double> y_joint;       // optimized under price and volume uncertainty
    std::vector<double> y_price_only;  // optimized believing nu_hat = 0
    std::vector<double> delta;         // y_joint - y_price_only
};

/// Per-lambda difference between the joint-uncertainty optimum and the
/// price-only optimum.
inline std::vector<StrategyDeltaRow> strategy_delta(Workspace& ws,
                                                    std::span<const double> lambdas) {
    std::vector<StrategyDeltaRow> rows;
    rows.reserve(lambdas.size());
    for (double lambda : lambdas) {
        const auto joint = solve_mean_cvar(ws.market(), ws.solve_set_full(), ws.beta(), lambda,
                                           ws.config().solver);
        const auto price = solve_mean_cvar(ws.market(), ws.solve_set_price_only(), ws.beta(),
                                           lambda, ws.config().solver);
        StrategyDeltaRow row;
        row.lambda = lambda;
        row.y_joint = joint.y_star.vec();
        row.y_price_only = price.y_star.vec();
        row.delta.resize(row.y_joint.size());
        for (std::size_t i = 0; i < row.delta.size(); ++i)
            row.delta[i] = row.y_joint[i] - row.y_price_only[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace optexec
