#pragma once

// Market description: per-period impact parameters, uncertainty scales,
// and the viability/convexity predicates that gate every solve.
//
// Periods are indexed 0..m-1 throughout the library.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace optexec {

/// All market constants for one execution program.
///
/// Units: tau [day], sigma [($/share)/day^(1/2)], epsilon [$/share],
/// eta [($/share)/(share/day)], gamma [$/share^2], d0 and nu [share],
/// s0 [$/share]. alpha is the CVaR tail level in (0,1].
///
/// Treat as immutable after construction; safe to share across threads.
struct MarketParams {
    int m = 0;
    std::vector<double> tau;
    std::vector<double> sigma;
    std::vector<double> epsilon;
    std::vector<double> eta;
    double gamma = 0.0;
    double d0 = 0.0;
    std::vector<double> nu;  // length m-1
    double alpha = 1.0;
    double s0 = 0.0;  // bookkeeping only; the liquidation cost never uses it

    void validate() const {
        auto fail = [](const std::string& msg) { throw std::invalid_argument("MarketParams: " + msg); };
        if (m < 1) fail("m must be >= 1");
        const auto n = static_cast<std::size_t>(m);
        if (tau.size() != n) fail("tau must have length m");
        if (sigma.size() != n) fail("sigma must have length m");
        if (epsilon.size() != n) fail("epsilon must have length m");
        if (eta.size() != n) fail("eta must have length m");
        if (nu.size() != n - 1) fail("nu must have length m-1");
        for (double t : tau)
            if (!(t > 0.0)) fail("all tau must be > 0");
        for (double s : sigma)
            if (!(s >= 0.0)) fail("all sigma must be >= 0");
        for (double e : epsilon)
            if (!(e >= 0.0)) fail("all epsilon must be >= 0");
        for (double h : eta)
            if (!(h > 0.0)) fail("all eta must be > 0");
        if (!(gamma >= 0.0)) fail("gamma must be >= 0");
        for (double v : nu)
            if (!(v >= 0.0)) fail("all nu must be >= 0");
        if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha must be in (0,1]");
    }
};

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Permanent impact g(v) = gamma * v for a trading rate v [share/day].
inline double permanent_impact(const MarketParams& p, double v) { return p.gamma * v; }

/// Temporary impact h_i(v) = epsilon_i * sign(v) + eta_i * v, with sign(0) = 0
/// so that a zero trade incurs zero fixed cost.
inline double temporary_impact(const MarketParams& p, int period, double v) {
    if (period < 0 || period >= p.m) throw std::out_of_range("temporary_impact: period out of range");
    return p.epsilon[static_cast<std::size_t>(period)] * sign(v) +
           p.eta[static_cast<std::size_t>(period)] * v;
}

/// Strict-convexity test for the execution cost: eta_i/tau_i - gamma/2 > 0
/// for every period. The margins are the per-period slack.
struct ConvexityReport {
    bool strictly_convex = false;
    std::vector<double> margins;  // eta_i/tau_i - gamma/2
};

inline ConvexityReport check_convexity(const MarketParams& p) {
    ConvexityReport r;
    r.margins.resize(static_cast<std::size_t>(p.m));
    r.strictly_convex = true;
    for (int i = 0; i < p.m; ++i) {
        const auto k = static_cast<std::size_t>(i);
        r.margins[k] = p.eta[k] / p.tau[k] - 0.5 * p.gamma;
        if (!(r.margins[k] > 0.0)) r.strictly_convex = false;
    }
    return r;
}

/// Viability matrix M = diag(eta_i/tau_i - gamma/2, i < m-1 periods)
/// + (eta_m/tau_m - gamma/2) * ones, of size (m-1)x(m-1). The market admits
/// no price manipulation only if M is positive semi-definite.
struct ViabilityReport {
    Eigen::MatrixXd matrix;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    bool positive_semidefinite = false;
    bool positive_definite = false;
};

inline ViabilityReport viability_matrix(const MarketParams& p) {
    if (p.m < 2) throw std::invalid_argument("viability_matrix: requires m >= 2");
    const int n = p.m - 1;
    const auto last = static_cast<std::size_t>(p.m - 1);
    const double w_last = p.eta[last] / p.tau[last] - 0.5 * p.gamma;
    ViabilityReport r;
    r.matrix = Eigen::MatrixXd::Constant(n, n, w_last);
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        r.matrix(i, i) += p.eta[k] / p.tau[k] - 0.5 * p.gamma;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.matrix, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    r.max_eigenvalue = es.eigenvalues().maxCoeff();
    // Floating-point tolerance on the exact semidefiniteness statement.
    const double scale = r.matrix.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    const double tol = 1e-10 * scale;
    r.positive_semidefinite = r.min_eigenvalue >= -tol;
    r.positive_definite = r.min_eigenvalue > tol;
    return r;
}

/// Absence-of-round-trip-profit condition for a trade of size q executed in
/// periods i and j (i != j):
///   (eps_i sign(q/tau_i) - eps_j sign(-q/tau_j)) + q (eta_i/tau_i + eta_j/tau_j)
/// must exceed gamma*q for q > 0 and fall below it for q < 0, strictly.
inline bool check_huberman_stanzl(const MarketParams& p, double q, int i, int j) {
    if (i == j) throw std::invalid_argument("check_huberman_stanzl: periods must differ");
    if (i < 0 || i >= p.m || j < 0 || j >= p.m)
        throw std::out_of_range("check_huberman_stanzl: period out of range");
    if (q == 0.0) throw std::invalid_argument("check_huberman_stanzl: q must be nonzero");
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(j);
    const double lhs = (p.epsilon[a] * sign(q / p.tau[a]) - p.epsilon[b] * sign(-q / p.tau[b])) +
                       q * (p.eta[a] / p.tau[a] + p.eta[b] / p.tau[b]);
    return q > 0.0 ? lhs > p.gamma * q : lhs < p.gamma * q;
}

inline bool constant_epsilon(const MarketParams& p) {
    return std::all_of(p.epsilon.begin(), p.epsilon.end(),
                       [&](double e) { return e == p.epsilon.front(); });
}

/// Per-period bid-ask spread schedule [$/share]: constant 1/8 for the stable
/// case 'a', rising linearly from 1/8 to 2/8 for the drying-up case 'b'.
inline std::vector<double> bid_ask_schedule(char market_case, int m) {
    if (market_case != 'a' && market_case != 'b')
        throw std::invalid_argument("bid_ask_schedule: case must be 'a' or 'b'");
    if (m < 1) throw std::invalid_argument("bid_ask_schedule: m must be >= 1");
    std::vector<double> b(static_cast<std::size_t>(m), 0.125);
    if (market_case == 'b' && m > 1)
        for (int i = 0; i < m; ++i)
            b[static_cast<std::size_t>(i)] = 0.125 * (1.0 + double(i) / double(m - 1));
    return b;
}

/// Reference market presets: epsilon_i = b_i/2, eta_i = b_i/(1% of daily
/// volume), gamma sized so that trading 10% of daily volume shifts the price
/// by 16 bid-ask spreads.
inline MarketParams make_preset(char market_case, int m = 5, double horizon_days = 5.0,
                                double daily_volume = 5e6, double d0 = 1e6, double sigma = 0.95,
                                double alpha = 0.3, double s0 = 50.0) {
    MarketParams p;
    p.m = m;
    const auto n = static_cast<std::size_t>(m);
    p.tau.assign(n, horizon_days / m);
    p.sigma.assign(n, sigma);
    const auto b = bid_ask_schedule(market_case, m);
    p.epsilon.resize(n);
    p.eta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        p.epsilon[i] = 0.5 * b[i];
        p.eta[i] = b[i] / (0.01 * daily_volume);
    }
    p.gamma = (16.0 / 8.0) / (0.1 * daily_volume);
    p.d0 = d0;
    p.nu.assign(n - 1, 0.05 * d0);
    p.alpha = alpha;
    p.s0 = s0;
    p.validate();
    return p;
}

/// Sub-market over periods [first, m): used when re-planning mid-course.
inline MarketParams tail_market(const MarketParams& p, int first) {
    if (first < 0 || first >= p.m) throw std::out_of_range("tail_market: first out of range");
    MarketParams t;
    t.m = p.m - first;
    const auto f = static_cast<std::size_t>(first);
    t.tau.assign(p.tau.begin() + f, p.tau.end());
    t.sigma.assign(p.sigma.begin() + f, p.sigma.end());
    t.epsilon.assign(p.epsilon.begin() + f, p.epsilon.end());
    t.eta.assign(p.eta.begin() + f, p.eta.end());
    t.gamma = p.gamma;
    t.d0 = p.d0;
    t.nu.assign(p.nu.begin() + std::min(p.nu.size(), f), p.nu.end());
    t.alpha = p.alpha;
    t.s0 = p.s0;
    return t;
}

}  // namespace optexec
