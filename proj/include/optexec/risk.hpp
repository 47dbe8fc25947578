#pragma once

// Empirical statistics of cost distributions: mean, variance, VaR, CVaR,
// the mean-CVaR trade-off, CDF/histogram exports, and first-order
// stochastic dominance checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace optexec {

/// VaR_alpha is the smallest value gamma with F(gamma) >= 1-alpha; on N
/// samples that is the ceil((1-alpha)N)-th smallest (the minimum for
/// alpha = 1).
///
/// The guard keeps ceil() from jumping an index when (1-alpha)*N is an
/// integer up to floating-point representation.
inline std::size_t var_order_index(std::size_t n, double alpha) {
    if (n == 0) throw std::invalid_argument("empirical VaR/CVaR: empty distribution");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
    const double q = (1.0 - alpha) * static_cast<double>(n);
    const double k = std::ceil(q - 1e-12 * (q + 1.0));
    return static_cast<std::size_t>(std::max(0.0, k));  // in [0, n]
}

inline double empirical_var(std::span<const double> samples, double alpha) {
    const std::size_t k0 = var_order_index(samples.size(), alpha);
    const std::size_t k = std::max<std::size_t>(k0, 1);
    std::vector<double> tmp(samples.begin(), samples.end());
    std::nth_element(tmp.begin(), tmp.begin() + (k - 1), tmp.end());
    return tmp[k - 1];
}

namespace detail {

/// CVaR from ascending-sorted samples: average of the alpha*N largest, the
/// boundary order statistic carrying the fractional weight. This is exactly
/// the minimum of the Rockafellar-Uryasev functional
///   t + (1/(alpha N)) sum max(0, c - t)
/// and is continuous in alpha.
inline double cvar_sorted(std::span<const double> sorted, double alpha) {
    const std::size_t n = sorted.size();
    const std::size_t k0 = var_order_index(n, alpha);
    const double tail_mass = alpha * static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = k0; i < n; ++i) acc += sorted[i];
    if (k0 >= 1) {
        const double frac = std::max(0.0, static_cast<double>(k0) - (1.0 - alpha) * n);
        acc += frac * sorted[k0 - 1];
    }
    return acc / tail_mass;
}

}  // namespace detail

inline double empirical_cvar(std::span<const double> samples, double alpha) {
    std::vector<double> tmp(samples.begin(), samples.end());
    std::sort(tmp.begin(), tmp.end());
    return detail::cvar_sorted(tmp, alpha);
}

/// Summary of a cost distribution under the mean-CVaR trade-off
/// phi = (1-lambda) mean + lambda CVaR_alpha.
struct RiskReport {
    double mean = 0.0;
    double variance = 0.0;
    double var_alpha = 0.0;
    double cvar_alpha = 0.0;
    double phi = 0.0;
    double alpha = 0.0;
    double lambda = 0.0;
};

inline RiskReport risk_report(std::span<const double> samples, double alpha, double lambda) {
    if (samples.size() < 2) throw std::invalid_argument("risk_report: need at least two samples");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("risk_report: lambda must be in [0,1]");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    for (double v : sorted)
        if (!std::isfinite(v)) throw std::domain_error("risk_report: non-finite sample");

    RiskReport r;
    r.alpha = alpha;
    r.lambda = lambda;
    const auto n = static_cast<double>(sorted.size());
    r.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : sorted) ss += (v - r.mean) * (v - r.mean);
    r.variance = ss / (n - 1.0);  // unbiased divisor
    const std::size_t k = std::max<std::size_t>(var_order_index(sorted.size(), alpha), 1);
    r.var_alpha = sorted[k - 1];
    r.cvar_alpha = detail::cvar_sorted(sorted, alpha);
    r.phi = (1.0 - lambda) * r.mean + lambda * r.cvar_alpha;
    return r;
}

/// Empirical CDF evaluated on an ascending grid.
inline std::vector<double> empirical_cdf(std::span<const double> samples,
                                         std::span<const double> grid) {
    if (samples.empty()) throw std::invalid_argument("empirical_cdf: empty distribution");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("empirical_cdf: grid must be sorted");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(grid.size());
    const auto n = static_cast<double>(sorted.size());
    for (double g : grid) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), g);
        out.push_back(static_cast<double>(it - sorted.begin()) / n);
    }
    return out;
}

/// One-sided Dvoretzky-Kiefer-Wolfowitz band half-width at confidence 1-delta.
inline double dkw_band(std::size_t n, double delta = 0.01) {
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

struct Sd1Result {
    bool dominates = false;
    double max_violation = 0.0;  // max over the grid of F_b - F_a
};

/// First-order stochastic dominance of a over b (a's costs stochastically
/// smaller): F_a(x) >= F_b(x) - tol at every grid point.
inline Sd1Result sd1_dominates(std::span<const double> samples_a, std::span<const double> samples_b,
                               std::span<const double> grid, double tol) {
    const auto fa = empirical_cdf(samples_a, grid);
    const auto fb = empirical_cdf(samples_b, grid);
    Sd1Result r;
    r.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i)
        r.max_violation = std::max(r.max_violation, fb[i] - fa[i]);
    r.dominates = r.max_violation <= tol;
    return r;
}

struct Histogram {
    std::vector<double> edges;    // bins+1 ascending
    std::vector<double> density;  // bins entries; sums to 1 against widths
};

inline Histogram histogram(std::span<const double> samples, int bins) {
    if (bins < 1) throw std::invalid_argument("histogram: need at least one bin");
    if (samples.empty()) throw std::invalid_argument("histogram: empty distribution");
    double lo = samples[0], hi = samples[0];
    for (double v : samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) {  // degenerate support; give it unit width
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * double(b) / double(bins);
    h.edges.back() = hi;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    const double scale = double(bins) / (hi - lo);
    for (double v : samples) {
        auto b = static_cast<long>((v - lo) * scale);
        b = std::clamp<long>(b, 0, bins - 1);  // right edge lands in the last bin
        ++counts[static_cast<std::size_t>(b)];
    }
    h.density.resize(static_cast<std::size_t>(bins));
    const auto n = static_cast<double>(samples.size());
    for (int b = 0; b < bins; ++b) {
        const auto i = static_cast<std::size_t>(b);
        const double width = h.edges[i + 1] - h.edges[i];
        h.density[i] = static_cast<double>(counts[i]) / (n * width);
    }
    return h;
}

}  // namespace optexec
