#pragma once

// Optimizers over the affine feasible sets {1'n = d_T} and {1'y = 1}.
//
// The mean-variance problem is an equality-constrained convex quadratic and
// is solved exactly through its KKT system (with active-set handling should
// a volume want to go negative). The mean-CVaR problem is solved on a fixed
// scenario set (sample-average approximation) with the Rockafellar-Uryasev
// threshold updated in closed form and a projected subgradient step on the
// strategy, using Polyak-style diminishing steps and best-iterate tracking.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "optexec/cost.hpp"
#include "optexec/market.hpp"
#include "optexec/parallel.hpp"
#include "optexec/risk.hpp"
#include "optexec/scenario.hpp"
#include "optexec/strategy.hpp"

namespace optexec {

struct MeanVarianceSolution {
    std::vector<double> n_star;   // optimal volumes [share]
    std::vector<double> y_star;   // n_star / d_T (zeros when d_T = 0)
    double objective = 0.0;       // E[cost] + lambda_var * Var[cost] at n_star
    double lambda_var = 0.0;      // risk aversion [1/$]
    double multiplier = 0.0;      // equality-constraint multiplier
    double kkt_residual = 0.0;    // relative stationarity residual on free volumes
    bool nonneg_active = false;   // true when the nonnegativity fallback engaged
};

namespace detail {

/// Quadratic data of the mean-variance objective in proportion space:
///   f(y) = y'P y + q'y + const,  P = diag(w) + lv * sum_k tausig_k e_k e_k',
/// where w_i = eta_i/tau_i - gamma/2, tausig_k = tau_k sigma_k^2 and e_k is
/// the all-ones prefix vector of length k+1.
struct MvQuadratic {
    Eigen::MatrixXd P;
    Eigen::VectorXd q;
    std::vector<double> suffix_tausig;  // S_i = sum_{k>=i} tau_k sigma_k^2
};

inline MvQuadratic mv_quadratic(const MarketParams& p, double d_abs, double lambda_var) {
    const int m = p.m;
    MvQuadratic o;
    o.suffix_tausig.assign(static_cast<std::size_t>(m) + 1, 0.0);
    for (int i = m - 1; i >= 0; --i) {
        const auto k = static_cast<std::size_t>(i);
        o.suffix_tausig[k] = o.suffix_tausig[k + 1] + p.tau[k] * p.sigma[k] * p.sigma[k];
    }
    o.P.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            o.P(i, j) = lambda_var * o.suffix_tausig[static_cast<std::size_t>(std::max(i, j))];
    for (int i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(i);
        o.P(i, i) += p.eta[k] / p.tau[k] - 0.5 * p.gamma;
    }
    o.q.resize(m);
    for (int i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(i);
        o.q(i) = p.epsilon[k] / d_abs - 2.0 * lambda_var * o.suffix_tausig[k];
    }
    return o;
}

/// Solve min y'Py + q'y s.t. the free entries sum to 1, with y_i = 0 for
/// every pinned index. The system is equilibrated by the largest diagonal
/// entry so its conditioning does not depend on the parameter scale.
inline void mv_solve_free(const MvQuadratic& o, const std::vector<int>& free_idx,
                          Eigen::VectorXd& y, double& mu) {
    const int f = static_cast<int>(free_idx.size());
    const int m = static_cast<int>(y.size());
    double scale = 0.0;
    for (int a = 0; a < f; ++a) scale = std::max(scale, 2.0 * o.P(free_idx[a], free_idx[a]));
    if (scale <= 0.0) scale = 1.0;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(f + 1, f + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f + 1);
    for (int a = 0; a < f; ++a) {
        for (int b = 0; b < f; ++b) K(a, b) = 2.0 * o.P(free_idx[a], free_idx[b]) / scale;
        K(a, f) = 1.0;
        K(f, a) = 1.0;
        rhs(a) = -o.q(free_idx[a]) / scale;
    }
    rhs(f) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible())
        throw std::runtime_error("solve_mean_variance: singular KKT system (convexity violated?)");
    const Eigen::VectorXd sol = lu.solve(rhs);
    y.setZero(m);
    for (int a = 0; a < f; ++a) y(free_idx[a]) = sol(a);
    mu = -sol(f) * scale;  // gradient stationarity: 2Py + q = mu * 1 on the free set
}

}  // namespace detail

/// Exact minimizer of E[cost] + lambda_var Var[cost] over {1'n = d_T}.
/// Solved in proportion space (volumes per unit demand), which also yields
/// the d_T-invariance of the proportions under constant epsilon.
inline MeanVarianceSolution solve_mean_variance(const MarketParams& p, double d_T,
                                                double lambda_var) {
    p.validate();
    if (!(lambda_var >= 0.0)) throw std::invalid_argument("solve_mean_variance: lambda_var < 0");
    if (!check_convexity(p).strictly_convex)
        throw std::invalid_argument("solve_mean_variance: market violates the convexity condition");
    const int m = p.m;
    MeanVarianceSolution sol;
    sol.lambda_var = lambda_var;
    sol.n_star.assign(static_cast<std::size_t>(m), 0.0);
    sol.y_star.assign(static_cast<std::size_t>(m), 0.0);
    if (d_T == 0.0) return sol;  // no demand, no trade

    const double d_abs = std::abs(d_T);
    const double flip = d_T > 0.0 ? 1.0 : -1.0;  // the objective is symmetric under n -> -n
    const auto quad = detail::mv_quadratic(p, d_abs, lambda_var);

    std::vector<int> free_idx(static_cast<std::size_t>(m));
    std::iota(free_idx.begin(), free_idx.end(), 0);
    Eigen::VectorXd y(m);
    double mu = 0.0;
    detail::mv_solve_free(quad, free_idx, y, mu);

    // Nonnegativity fallback: the unconstrained-sign solution is expected to
    // be nonnegative; if not, pin offending proportions at zero and check the
    // duals of the pinned set.
    if (y.minCoeff() < -1e-9) {
        sol.nonneg_active = true;
        std::vector<bool> fixed(static_cast<std::size_t>(m), false);
        bool settled = false;
        for (int pass = 0; pass < 4 * m + 8; ++pass) {
            int worst = -1;
            double worst_val = -1e-12;
            for (int i : free_idx)
                if (y(i) < worst_val) {
                    worst_val = y(i);
                    worst = i;
                }
            if (worst >= 0) {
                fixed[static_cast<std::size_t>(worst)] = true;
                free_idx.erase(std::find(free_idx.begin(), free_idx.end(), worst));
                if (free_idx.empty())
                    throw std::runtime_error("solve_mean_variance: active set emptied");
                detail::mv_solve_free(quad, free_idx, y, mu);
                continue;
            }
            // primal feasible; check duals s_i = (2Py + q)_i - mu >= 0
            const Eigen::VectorXd grad = 2.0 * quad.P * y + quad.q;
            int release = -1;
            double most_neg = -1e-10 * std::max(1.0, grad.cwiseAbs().maxCoeff());
            for (int i = 0; i < m; ++i)
                if (fixed[static_cast<std::size_t>(i)] && grad(i) - mu < most_neg) {
                    most_neg = grad(i) - mu;
                    release = i;
                }
            if (release < 0) {
                settled = true;
                break;
            }
            fixed[static_cast<std::size_t>(release)] = false;
            free_idx.push_back(release);
            std::sort(free_idx.begin(), free_idx.end());
            detail::mv_solve_free(quad, free_idx, y, mu);
        }
        if (!settled)
            throw std::runtime_error("solve_mean_variance: active set did not converge");
    }

    for (int i = 0; i < m; ++i) {
        sol.y_star[static_cast<std::size_t>(i)] = y(i);
        sol.n_star[static_cast<std::size_t>(i)] = flip * d_abs * y(i);
    }
    sol.multiplier = mu * d_abs;

    // Objective and stationarity residual in volume space.
    double cum = 0.0, expectation = 0.5 * p.gamma * d_T * d_T, variance = 0.0;
    std::vector<double> grad_n(static_cast<std::size_t>(m), 0.0);
    std::vector<double> remaining(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        const auto k = static_cast<std::size_t>(i);
        cum += sol.n_star[k];
        remaining[k] = d_T - cum;
        const double w = p.eta[k] / p.tau[k] - 0.5 * p.gamma;
        expectation += p.epsilon[k] * std::abs(sol.n_star[k]) + w * sol.n_star[k] * sol.n_star[k];
        variance += p.tau[k] * p.sigma[k] * p.sigma[k] * remaining[k] * remaining[k];
    }
    sol.objective = expectation + lambda_var * variance;
    double suffix = 0.0;
    for (int i = m - 1; i >= 0; --i) {
        const auto k = static_cast<std::size_t>(i);
        suffix += p.tau[k] * p.sigma[k] * p.sigma[k] * remaining[k];
        const double w = p.eta[k] / p.tau[k] - 0.5 * p.gamma;
        grad_n[k] = p.epsilon[k] * sign(sol.n_star[k]) + 2.0 * w * sol.n_star[k] -
                    2.0 * lambda_var * suffix;
    }
    double gnorm = 0.0, rnorm = 0.0;
    for (int i : free_idx) {
        const auto k = static_cast<std::size_t>(i);
        gnorm += grad_n[k] * grad_n[k];
        const double r = grad_n[k] - sol.multiplier;
        rnorm += r * r;
    }
    sol.kkt_residual = std::sqrt(rnorm) / std::max(std::sqrt(gnorm), 1e-300);
    return sol;
}

struct SolverConfig {
    int max_iters = 20000;
    double rel_tol = 1e-7;      // relative objective tolerance
    int patience = 50;          // iterations without improvement before the level shrinks
    double initial_level = 0.02;  // Polyak target gap, relative to the best objective
    double level_shrink = 0.5;
    int restarts = 1;
    std::uint64_t seed = 0;  // multistart perturbation stream

    void validate() const {
        if (max_iters < 1 || patience < 1 || restarts < 1)
            throw std::invalid_argument("SolverConfig: counters must be positive");
        if (!(rel_tol > 0.0) || !(initial_level > 0.0) || !(level_shrink > 0.0 && level_shrink < 1.0))
            throw std::invalid_argument("SolverConfig: tolerances must be positive");
    }
};

struct MeanCvarSolution {
    Strategy y_star;
    double t_star = 0.0;    // Rockafellar-Uryasev threshold (VaR proxy) [$]
    double objective = 0.0; // SAA value of (1-lambda) mean + lambda CVaR
    double lambda = 0.0;
    bool negative_proportions = false;  // the feasible set only pins the sum; report sign dips
    struct Diagnostics {
        int iterations = 0;
        double final_step_norm = 0.0;
        std::vector<double> objective_history;  // best value after each iteration
        bool converged = false;
        int restarts_used = 1;
    } diagnostics;
};

namespace detail {

/// Scenario data laid out for fast repeated evaluation: per path the
/// volume map n = L y (diagonal D_{i-1} plus packed strict lower part),
/// the suffix sums of sqrt(tau) xi, the realized demand and the
/// y-independent part of the cost.
struct PreparedScenarios {
    int m = 0;
    std::size_t n = 0;
    std::size_t lower = 0;  // m(m-1)/2
    std::vector<double> diag;        // n*m
    std::vector<double> loff;        // n*lower, packed (i,r), r<i
    std::vector<double> xi_suffix;   // n*m
    std::vector<double> d_t;         // n
    std::vector<double> cost_const;  // n
};

inline std::size_t lower_index(int i, int r) {
    return static_cast<std::size_t>(i) * (static_cast<std::size_t>(i) - 1) / 2 +
           static_cast<std::size_t>(r);
}

inline PreparedScenarios prepare_scenarios(const MarketParams& p, const ScenarioSet& set,
                                           const RedistributionMatrix& beta) {
    const int m = p.m;
    PreparedScenarios ps;
    ps.m = m;
    ps.n = set.size();
    ps.lower = static_cast<std::size_t>(m) * (static_cast<std::size_t>(m) - 1) / 2;
    ps.diag.resize(ps.n * static_cast<std::size_t>(m));
    ps.loff.resize(ps.n * ps.lower);
    ps.xi_suffix.resize(ps.n * static_cast<std::size_t>(m));
    ps.d_t.resize(ps.n);
    ps.cost_const.resize(ps.n);
    std::vector<double> sqrt_tau(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        sqrt_tau[static_cast<std::size_t>(i)] = std::sqrt(p.tau[static_cast<std::size_t>(i)]);

    par::for_chunks(ps.n, par::default_chunk, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t s = b; s < e; ++s) {
            const ScenarioView sc = set.view(s);
            double* diag = ps.diag.data() + s * static_cast<std::size_t>(m);
            double* loff = ps.loff.data() + s * ps.lower;
            double* xs = ps.xi_suffix.data() + s * static_cast<std::size_t>(m);
            double demand = p.d0;
            for (int i = 0; i < m; ++i) {
                diag[i] = demand;
                for (int r = 0; r < i; ++r) {
                    double acc = 0.0;
                    for (int k = r; k < i; ++k)
                        acc += sc.delta[static_cast<std::size_t>(k)] * beta(k, i);
                    loff[lower_index(i, r)] = acc;
                }
                demand += sc.delta[static_cast<std::size_t>(i)];
            }
            double suffix = 0.0;
            for (int i = m - 1; i >= 0; --i) {
                suffix += sqrt_tau[static_cast<std::size_t>(i)] * sc.xi[static_cast<std::size_t>(i)];
                xs[i] = suffix;
            }
            ps.d_t[s] = demand;
            ps.cost_const[s] = demand * xs[0] + 0.5 * p.gamma * demand * demand;
        }
    });
    return ps;
}

}  // namespace detail

/// SAA value of the mean-CVaR objective for a fixed strategy on a fixed
/// scenario set. Deterministic: no fresh sampling.
inline RiskReport evaluate_objective(const MarketParams& p, const ScenarioSet& set,
                                     const RedistributionMatrix& beta, const Strategy& y,
                                     double lambda) {
    const auto costs = evaluate_costs(p, y, beta, set);
    return risk_report(costs, p.alpha, lambda);
}

/// Minimize (1-lambda) mean + lambda CVaR_alpha of the scenario costs over
/// {1'y = 1}, jointly in (y, t) with t eliminated in closed form at every
/// iterate. Deterministic given (scenarios, config).
inline MeanCvarSolution solve_mean_cvar(const MarketParams& p, const ScenarioSet& set,
                                        const RedistributionMatrix& beta, double lambda,
                                        const SolverConfig& cfg = {}) {
    p.validate();
    cfg.validate();
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("solve_mean_cvar: lambda must be in [0,1]");
    if (!check_convexity(p).strictly_convex)
        throw std::invalid_argument("solve_mean_cvar: market violates the convexity condition");
    if (set.size() < 100) throw std::invalid_argument("solve_mean_cvar: need at least 100 paths");
    if (set.m() != p.m || beta.size() != p.m)
        throw std::invalid_argument("solve_mean_cvar: dimension mismatch");

    const int m = p.m;
    const auto mm = static_cast<std::size_t>(m);
    const std::size_t n = set.size();
    const double alpha = p.alpha;
    const double tail_mass = alpha * static_cast<double>(n);
    const auto ps = detail::prepare_scenarios(p, set, beta);

    std::vector<double> curvature(mm);
    for (std::size_t i = 0; i < mm; ++i) curvature[i] = p.eta[i] / p.tau[i] - 0.5 * p.gamma;

    // Iteration workspaces (written chunk-disjoint, read after the barrier).
    std::vector<double> vols(n * mm);
    std::vector<double> costs(n);
    std::vector<double> scratch(n);
    const std::size_t chunk = par::default_chunk;

    struct Best {
        std::vector<double> y;
        double phi = std::numeric_limits<double>::infinity();
        double t = 0.0;
    };
    Best global;
    MeanCvarSolution::Diagnostics diag;

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        // Start from uniform; later restarts add a zero-sum perturbation.
        std::vector<double> y(mm, 1.0 / m);
        if (restart > 0) {
            double mean_z = 0.0;
            std::vector<double> z(mm);
            for (std::size_t i = 0; i < mm; ++i) {
                z[i] = rng::normal_at(cfg.seed, static_cast<std::uint64_t>(restart), i);
                mean_z += z[i];
            }
            mean_z /= static_cast<double>(m);
            for (std::size_t i = 0; i < mm; ++i) y[i] += 0.5 / m * (z[i] - mean_z);
        }

        Best best;
        double level = cfg.initial_level;
        int stall = 0;
        double last_step_norm = 0.0;
        bool converged = false;
        int it = 0;

        for (; it < cfg.max_iters; ++it) {
            // Pass 1: volumes and costs.
            auto partial_means = par::map_chunks<double>(n, chunk, [&](std::size_t b, std::size_t e) {
                double acc = 0.0;
                for (std::size_t s = b; s < e; ++s) {
                    const double* dg = ps.diag.data() + s * mm;
                    const double* lo = ps.loff.data() + s * ps.lower;
                    const double* xs = ps.xi_suffix.data() + s * mm;
                    double* nn = vols.data() + s * mm;
                    double c = ps.cost_const[s];
                    for (int i = 0; i < m; ++i) {
                        double v = dg[i] * y[static_cast<std::size_t>(i)];
                        for (int r = 0; r < i; ++r)
                            v += lo[detail::lower_index(i, r)] * y[static_cast<std::size_t>(r)];
                        nn[i] = v;
                        c += -xs[i] * v + p.epsilon[static_cast<std::size_t>(i)] * std::abs(v) +
                             curvature[static_cast<std::size_t>(i)] * v * v;
                    }
                    costs[s] = c;
                    acc += c;
                }
                return acc;
            });
            double mean = 0.0;
            for (double v : partial_means) mean += v;
            mean /= static_cast<double>(n);

            // Rockafellar-Uryasev threshold: the VaR order statistic.
            const std::size_t k = std::max<std::size_t>(var_order_index(n, alpha), 1);
            std::copy(costs.begin(), costs.end(), scratch.begin());
            std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
            const double t_star = scratch[k - 1];

            struct TailAcc {
                double excess = 0.0;
                std::size_t above = 0, equal = 0;
            };
            auto tails = par::map_chunks<TailAcc>(n, chunk, [&](std::size_t b, std::size_t e) {
                TailAcc a;
                for (std::size_t s = b; s < e; ++s) {
                    if (costs[s] > t_star) {
                        a.excess += costs[s] - t_star;
                        ++a.above;
                    } else if (costs[s] == t_star) {
                        ++a.equal;
                    }
                }
                return a;
            });
            TailAcc tail;
            for (const auto& a : tails) {
                tail.excess += a.excess;
                tail.above += a.above;
                tail.equal += a.equal;
            }
            const double cvar = t_star + tail.excess / tail_mass;
            const double phi = (1.0 - lambda) * mean + lambda * cvar;

            const bool improved = phi < best.phi - cfg.rel_tol * std::max(std::abs(best.phi), 1.0);
            if (phi < best.phi) {
                best.phi = phi;
                best.t = t_star;
                best.y = y;
            }
            if (best.phi < global.phi) global = best;
            diag.objective_history.push_back(global.phi);
            if (improved) {
                stall = 0;
            } else if (++stall > cfg.patience) {
                level *= cfg.level_shrink;
                stall = 0;
                if (level < cfg.rel_tol) {
                    converged = true;
                    ++it;
                    break;
                }
            }

            // Pass 2: subgradient. Tail samples weigh 1/(alpha N) on top of
            // the (1-lambda)/N mean weight; boundary samples share the
            // fractional remainder so the weights sum exactly to the RU value.
            const double w_mean = (1.0 - lambda) / static_cast<double>(n);
            const double w_tail = lambda / tail_mass;
            const double w_equal =
                tail.equal > 0
                    ? (tail_mass - static_cast<double>(tail.above)) / static_cast<double>(tail.equal)
                    : 0.0;
            auto partial_grads =
                par::map_chunks<std::vector<double>>(n, chunk, [&](std::size_t b, std::size_t e) {
                    std::vector<double> g(mm, 0.0);
                    std::vector<double> gn(mm);
                    for (std::size_t s = b; s < e; ++s) {
                        double w = w_mean;
                        if (costs[s] > t_star)
                            w += w_tail;
                        else if (costs[s] == t_star)
                            w += w_tail * w_equal;
                        if (w == 0.0) continue;
                        const double* dg = ps.diag.data() + s * mm;
                        const double* lo = ps.loff.data() + s * ps.lower;
                        const double* xs = ps.xi_suffix.data() + s * mm;
                        const double* nn = vols.data() + s * mm;
                        for (int i = 0; i < m; ++i)
                            gn[static_cast<std::size_t>(i)] =
                                -xs[i] + p.epsilon[static_cast<std::size_t>(i)] * sign(nn[i]) +
                                2.0 * curvature[static_cast<std::size_t>(i)] * nn[i];
                        for (int r = 0; r < m; ++r) {
                            double acc = dg[r] * gn[static_cast<std::size_t>(r)];
                            for (int i = r + 1; i < m; ++i)
                                acc += lo[detail::lower_index(i, r)] * gn[static_cast<std::size_t>(i)];
                            g[static_cast<std::size_t>(r)] += w * acc;
                        }
                    }
                    return g;
                });
            std::vector<double> grad(mm, 0.0);
            for (const auto& g : partial_grads)
                for (std::size_t i = 0; i < mm; ++i) grad[i] += g[i];

            // Project onto the constraint tangent space {1'h = 0}.
            double gmean = std::accumulate(grad.begin(), grad.end(), 0.0) / m;
            double gnorm2 = 0.0;
            for (std::size_t i = 0; i < mm; ++i) {
                grad[i] -= gmean;
                gnorm2 += grad[i] * grad[i];
            }
            if (gnorm2 <= 1e-30 * std::max(1.0, phi * phi)) {
                converged = true;  // stationary on the feasible set
                ++it;
                break;
            }

            const double target = best.phi - level * std::max(std::abs(best.phi), 1.0);
            const double step = (phi - target) / gnorm2;
            for (std::size_t i = 0; i < mm; ++i) y[i] -= step * grad[i];
            const double drift = (std::accumulate(y.begin(), y.end(), 0.0) - 1.0) / m;
            for (std::size_t i = 0; i < mm; ++i) y[i] -= drift;
            last_step_norm = step * std::sqrt(gnorm2);
        }

        diag.iterations += it;
        diag.final_step_norm = last_step_norm;
        diag.converged = converged || diag.converged;
        if (best.phi < global.phi) global = best;
    }
    diag.restarts_used = cfg.restarts;

    MeanCvarSolution out{Strategy(global.y), global.t, global.phi, lambda, false, {}};
    out.negative_proportions =
        std::any_of(global.y.begin(), global.y.end(), [](double v) { return v < 0.0; });
    out.diagnostics = std::move(diag);
    return out;
}

}  // namespace optexec
