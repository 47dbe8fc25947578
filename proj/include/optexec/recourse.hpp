#pragma once

// Mean-variance execution deployed with systematic recourse: the strategy
// is re-optimized at every decision time from the newest demand forecast,
// and only the first period of each re-plan is executed.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "optexec/cost.hpp"
#include "optexec/market.hpp"
#include "optexec/parallel.hpp"
#include "optexec/scenario.hpp"
#include "optexec/solver.hpp"
#include "optexec/strategy.hpp"

namespace optexec {

struct RecourseResult {
    std::vector<double> volumes;
    double cost = 0.0;
};

/// Simulate one path: at decision time i solve the mean-variance problem
/// over the remaining periods for the remaining demand D_i - traded, execute
/// its first volume. The last period always absorbs the full residual, so
/// the cumulative volume ends at d_T exactly.
inline RecourseResult simulate_recourse(const MarketParams& p, double lambda_var,
                                        const ScenarioView& s) {
    if (!check_convexity(p).strictly_convex)
        throw std::invalid_argument("simulate_recourse: market violates the convexity condition");
    const int m = p.m;
    RecourseResult r;
    r.volumes.assign(static_cast<std::size_t>(m), 0.0);
    double forecast = p.d0;  // D_i, updated as forecasts arrive
    double traded = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i > 0) forecast += s.delta[static_cast<std::size_t>(i - 1)];
        const double remaining = forecast - traded;
        double n_i;
        if (i == m - 1) {
            n_i = remaining;
        } else {
            const auto sub = solve_mean_variance(tail_market(p, i), remaining, lambda_var);
            n_i = sub.n_star.front();
        }
        r.volumes[static_cast<std::size_t>(i)] = n_i;
        traded += n_i;
    }
    r.cost = cost_simplified(p, r.volumes, s);
    return r;
}

/// Cost distribution of the recourse policy over a scenario batch;
/// scenario-parallel and deterministic per path.
inline std::vector<double> recourse_costs(const MarketParams& p, double lambda_var,
                                          const ScenarioSet& set) {
    if (set.m() != p.m) throw std::invalid_argument("recourse_costs: dimension mismatch");
    std::vector<double> out(set.size());
    par::for_chunks(set.size(), par::default_chunk, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t path = b; path < e; ++path)
            out[path] = simulate_recourse(p, lambda_var, set.view(path)).cost;
    });
    return out;
}

struct StaticEquivalent {
    Strategy y;
    RedistributionMatrix beta;
    bool epsilon_constant = true;  // the volume equality is only guaranteed when true
};

/// Static (strategy, redistribution) pair whose scenario volumes reproduce
/// the recourse volumes path by path: y is the time-zero optimum and beta is
/// the redistribution it implies. With non-constant epsilon the construction
/// still returns, flagged, but equality is no longer guaranteed.
inline StaticEquivalent reproduce_with_static(const MarketParams& p, double lambda_var) {
    const auto t0 = solve_mean_variance(p, p.d0, lambda_var);
    Strategy y{std::vector<double>(t0.y_star)};
    auto beta = RedistributionMatrix::implied(y);
    return {std::move(y), std::move(beta), constant_epsilon(p)};
}

}  // namespace optexec
