#pragma once

// Liquidation-cost evaluation. Three algebraically equivalent routes are
// kept on purpose: the volume-based definition, the proportion-based
// definition, and the expanded form used on the hot path.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "optexec/market.hpp"
#include "optexec/parallel.hpp"
#include "optexec/scenario.hpp"
#include "optexec/strategy.hpp"

namespace optexec {

/// Cost of trading the fixed volumes n against a known total demand d_T:
///   sum_i (tau_i^(1/2) xi_i + tau_i g(n_i/tau_i)) (d_T - sum_{k<=i} n_k)
///   + sum_i n_i h_i(n_i/tau_i).
/// Requires sum(n) = d_T within 1e-6 relative.
inline double cost_mv(const MarketParams& p, std::span<const double> n, double d_T,
                      const ScenarioView& s) {
    const auto m = static_cast<std::size_t>(p.m);
    if (n.size() != m || s.xi.size() != m) throw std::invalid_argument("cost_mv: dimension mismatch");
    double total = 0.0;
    for (double v : n) total += v;
    if (std::abs(total - d_T) > 1e-6 * std::max(std::abs(d_T), 1.0))
        throw std::invalid_argument("cost_mv: volumes do not add up to d_T");
    double cost = 0.0;
    double cum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        cum += n[i];
        const double rate = n[i] / p.tau[i];
        cost += (std::sqrt(p.tau[i]) * s.xi[i] + p.tau[i] * permanent_impact(p, rate)) * (d_T - cum);
        cost += n[i] * temporary_impact(p, static_cast<int>(i), rate);
    }
    return cost;
}

/// Definitional cost of a proportion strategy under a scenario, evaluated
/// term by term with the scenario-dependent volumes. Retained as the oracle
/// for the expanded form below.
inline double cost_proportional(const MarketParams& p, const Strategy& y,
                                const RedistributionMatrix& beta, const ScenarioView& s) {
    const auto m = static_cast<std::size_t>(p.m);
    const VolumePlan plan = volumes(y, beta, p.d0, s);
    double d_T = p.d0;
    for (double d : s.delta) d_T += d;
    double cost = 0.0;
    double cum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double n_i = plan.n[i];
        cum += n_i;
        const double rate = n_i / p.tau[i];
        cost += (std::sqrt(p.tau[i]) * s.xi[i] + p.tau[i] * permanent_impact(p, rate)) * (d_T - cum);
        cost += n_i * temporary_impact(p, static_cast<int>(i), rate);
    }
    return cost;
}

/// Expanded cost for volumes that add up to the scenario demand
/// d_T = D_0 + sum(delta):
///   sum_i tau_i^(1/2) xi_i (d_T - sum_{k<=i} n_k) + (gamma/2) d_T^2
///   + sum_i eps_i |n_i| + sum_i (eta_i/tau_i - gamma/2) n_i^2.
/// Fewer flops and numerically stabler; the hot-path evaluator.
inline double cost_simplified(const MarketParams& p, std::span<const double> n,
                              const ScenarioView& s) {
    const auto m = static_cast<std::size_t>(p.m);
    if (n.size() != m || s.xi.size() != m)
        throw std::invalid_argument("cost_simplified: dimension mismatch");
    double d_T = p.d0;
    for (double d : s.delta) d_T += d;
    double cost = 0.5 * p.gamma * d_T * d_T;
    double cum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        cum += n[i];
        cost += std::sqrt(p.tau[i]) * s.xi[i] * (d_T - cum);
        cost += p.epsilon[i] * std::abs(n[i]);
        cost += (p.eta[i] / p.tau[i] - 0.5 * p.gamma) * n[i] * n[i];
    }
    return cost;
}

/// Batch evaluator for a fixed (y, beta) over a scenario set. Precomputes
/// the per-period curvature and sqrt(tau) once; scenario-parallel with a
/// deterministic chunk order.
inline std::vector<double> evaluate_costs(const MarketParams& p, const Strategy& y,
                                          const RedistributionMatrix& beta,
                                          const ScenarioSet& set) {
    if (set.m() != p.m || y.size() != p.m || beta.size() != p.m)
        throw std::invalid_argument("evaluate_costs: dimension mismatch");
    const auto m = static_cast<std::size_t>(p.m);
    std::vector<double> sqrt_tau(m), curvature(m);
    for (std::size_t i = 0; i < m; ++i) {
        sqrt_tau[i] = std::sqrt(p.tau[i]);
        curvature[i] = p.eta[i] / p.tau[i] - 0.5 * p.gamma;
    }
    std::vector<double> cum_y(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        acc += y[i];
        cum_y[i] = acc;
    }

    std::vector<double> out(set.size());
    par::for_chunks(set.size(), par::default_chunk, [&](std::size_t, std::size_t b, std::size_t e) {
        std::vector<double> n(m);
        for (std::size_t path = b; path < e; ++path) {
            const ScenarioView s = set.view(path);
            double demand = p.d0;
            for (std::size_t i = 0; i < m; ++i) {
                double n_i = y[i] * demand;
                for (std::size_t k = 0; k < i; ++k)
                    n_i += beta(static_cast<int>(k), static_cast<int>(i)) * s.delta[k] * cum_y[k];
                n[i] = n_i;
                demand += s.delta[i];
            }
            const double d_T = demand;  // D_0 + sum(delta)
            double cost = 0.5 * p.gamma * d_T * d_T;
            double cum = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                cum += n[i];
                cost += sqrt_tau[i] * s.xi[i] * (d_T - cum) + p.epsilon[i] * std::abs(n[i]) +
                        curvature[i] * n[i] * n[i];
            }
            out[path] = cost;
        }
    });
    return out;
}

}  // namespace optexec
