#pragma once

// Independent oracles used by the tests. Everything here deliberately
// avoids the library's own computational paths: quantiles come from
// bisection on std::erfc, CVaR from a golden-section search on the
// Rockafellar-Uryasev functional, optima from brute-force grids.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace oracles {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

/// Quantile by bisection on the erfc-based CDF; independent of the
/// library's rational-approximation inverse.
inline double normal_quantile_bisect(double p) {
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Closed-form CVaR of N(mu, sd^2) at upper-tail level alpha.
inline double normal_cvar(double mu, double sd, double alpha) {
    return mu + sd * normal_pdf(normal_quantile_bisect(1.0 - alpha)) / alpha;
}

/// Golden-section minimization of a unimodal function on [a, b].
inline double golden_section_min(const std::function<double(double)>& f, double a, double b,
                                 int iters = 200) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iters; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return f(0.5 * (a + b));
}

/// Rockafellar-Uryasev functional t + (1/(alpha N)) sum max(0, c - t).
inline double ru_functional(std::span<const double> costs, double alpha, double t) {
    double acc = 0.0;
    for (double c : costs) acc += std::max(0.0, c - t);
    return t + acc / (alpha * static_cast<double>(costs.size()));
}

/// CVaR via golden-section search over the RU functional; the independent
/// route against the closed-form order-statistic estimator.
inline double cvar_by_search(std::span<const double> costs, double alpha) {
    const auto [lo, hi] = std::minmax_element(costs.begin(), costs.end());
    return golden_section_min([&](double t) { return ru_functional(costs, alpha, t); }, *lo, *hi,
                              300);
}

}  // namespace oracles
