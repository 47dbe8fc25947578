#pragma once

// Strategies as demand proportions, the redistribution of forecast errors
// over later periods, and the map from (strategy, scenario) to traded
// volumes.

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "optexec/scenario.hpp"

namespace optexec {

/// Proportions y of the total demand, one per period, summing to 1.
/// Constructors renormalize when |sum-1| <= 1e-9 and reject otherwise, so
/// optimizer iterates cannot drift silently.
class Strategy {
public:
    Strategy() = default;  // empty placeholder; any use with a market of m >= 1 periods rejects it

    explicit Strategy(std::vector<double> y) : y_(std::move(y)) {
        if (y_.empty()) throw std::invalid_argument("Strategy: empty proportion vector");
        const double s = std::accumulate(y_.begin(), y_.end(), 0.0);
        if (!(std::abs(s - 1.0) <= 1e-9))
            throw std::invalid_argument("Strategy: proportions must sum to 1");
        for (double& v : y_) v /= s;
    }

    static Strategy uniform(int m) {
        return Strategy(std::vector<double>(static_cast<std::size_t>(m), 1.0 / m));
    }

    int size() const { return static_cast<int>(y_.size()); }
    double operator[](std::size_t i) const { return y_[i]; }
    std::span<const double> y() const { return y_; }
    const std::vector<double>& vec() const { return y_; }

private:
    std::vector<double> y_;
};

/// beta(k,i) is the proportion of the forecast error revealed at decision
/// time k that is corrected during period i. Lower part (i <= k) is zero and
/// each row k < m-1 sums to 1 over i > k; the last row is all zero.
class RedistributionMatrix {
public:
    RedistributionMatrix(int m, std::vector<double> entries) : m_(m), b_(std::move(entries)) {
        if (m_ < 1) throw std::invalid_argument("RedistributionMatrix: m must be >= 1");
        if (b_.size() != static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_))
            throw std::invalid_argument("RedistributionMatrix: entry count must be m*m");
        for (int k = 0; k < m_; ++k) {
            double row = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (i <= k) {
                    if ((*this)(k, i) != 0.0)
                        throw std::invalid_argument(
                            "RedistributionMatrix: entries with i <= k must be zero");
                } else {
                    row += (*this)(k, i);
                }
            }
            if (k < m_ - 1 && std::abs(row - 1.0) > 1e-12)
                throw std::invalid_argument("RedistributionMatrix: row must sum to 1");
        }
    }

    int size() const { return m_; }
    double operator()(int k, int i) const {
        return b_[static_cast<std::size_t>(k) * static_cast<std::size_t>(m_) +
                  static_cast<std::size_t>(i)];
    }
    const std::vector<double>& entries() const { return b_; }

    /// Redistribution implied by a reference strategy: beta(k,i) =
    /// y_i / sum_{j>k} y_j for i > k. Every suffix sum must be nonzero.
    static RedistributionMatrix implied(const Strategy& ref) {
        const int m = ref.size();
        std::vector<double> suffix(static_cast<std::size_t>(m) + 1, 0.0);
        for (int i = m - 1; i >= 0; --i)
            suffix[static_cast<std::size_t>(i)] =
                suffix[static_cast<std::size_t>(i) + 1] + ref[static_cast<std::size_t>(i)];
        std::vector<double> b(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
        for (int k = 0; k + 1 < m; ++k) {
            const double tail = suffix[static_cast<std::size_t>(k) + 1];
            if (tail == 0.0)
                throw std::invalid_argument(
                    "RedistributionMatrix::implied: zero suffix sum (degenerate reference)");
            for (int i = k + 1; i < m; ++i)
                b[static_cast<std::size_t>(k) * static_cast<std::size_t>(m) +
                  static_cast<std::size_t>(i)] = ref[static_cast<std::size_t>(i)] / tail;
        }
        return {m, std::move(b)};
    }

private:
    int m_;
    std::vector<double> b_;  // row-major m x m
};

/// Realized trade volumes for one scenario [share].
struct VolumePlan {
    std::vector<double> n;
    double total() const { return std::accumulate(n.begin(), n.end(), 0.0); }
};

/// Volumes n_i = y_i D_{i-1} + sum_{k<i} beta(k,i) delta_k (sum_{r<=k} y_r).
/// Their total telescopes to d_T = D_0 + sum(delta) for any (y, beta).
inline VolumePlan volumes(const Strategy& y, const RedistributionMatrix& beta, double d0,
                          const ScenarioView& s) {
    const int m = y.size();
    if (beta.size() != m || static_cast<int>(s.delta.size()) != m)
        throw std::invalid_argument("volumes: dimension mismatch");
    VolumePlan plan;
    plan.n.resize(static_cast<std::size_t>(m));
    double demand = d0;   // D_{i-1}
    double cum_y = 0.0;   // sum_{r<=k} y_r, advanced with k
    std::vector<double> cum_y_at(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        cum_y += y[static_cast<std::size_t>(k)];
        cum_y_at[static_cast<std::size_t>(k)] = cum_y;
    }
    for (int i = 0; i < m; ++i) {
        double n_i = y[static_cast<std::size_t>(i)] * demand;
        for (int k = 0; k < i; ++k)
            n_i += beta(k, i) * s.delta[static_cast<std::size_t>(k)] *
                   cum_y_at[static_cast<std::size_t>(k)];
        plan.n[static_cast<std::size_t>(i)] = n_i;
        demand += s.delta[static_cast<std::size_t>(i)];
    }
    return plan;
}

/// Lower-triangular matrix L with n = L y for a fixed scenario:
/// L(i,i) = D_{i-1} and L(i,r) = sum_{k=r..i-1} delta_k beta(k,i) for r < i.
inline Eigen::MatrixXd volume_matrix(int m, const RedistributionMatrix& beta, double d0,
                                     const ScenarioView& s) {
    if (beta.size() != m || static_cast<int>(s.delta.size()) != m)
        throw std::invalid_argument("volume_matrix: dimension mismatch");
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
    double demand = d0;
    for (int i = 0; i < m; ++i) {
        L(i, i) = demand;
        for (int r = 0; r < i; ++r) {
            double acc = 0.0;
            for (int k = r; k < i; ++k)
                acc += s.delta[static_cast<std::size_t>(k)] * beta(k, i);
            L(i, r) = acc;
        }
        demand += s.delta[static_cast<std::size_t>(i)];
    }
    return L;
}

/// Tail of a strategy after `elapsed` periods, rescaled to sum to 1.
inline Strategy continuation(const Strategy& y, int elapsed) {
    const int m = y.size();
    if (elapsed < 0 || elapsed >= m) throw std::invalid_argument("continuation: elapsed out of range");
    double tail = 0.0;
    for (int i = elapsed; i < m; ++i) tail += y[static_cast<std::size_t>(i)];
    if (tail == 0.0) throw std::invalid_argument("continuation: zero suffix sum");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m - elapsed));
    for (int i = elapsed; i < m; ++i) out.push_back(y[static_cast<std::size_t>(i)] / tail);
    return Strategy(std::move(out));
}

}  // namespace optexec
