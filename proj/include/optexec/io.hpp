#pragma once

// Output formatting. Numbers are written with the shortest decimal
// representation that round-trips the exact 64-bit value, so reruns with
// the same seeds produce byte-identical files.

#include <charconv>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "optexec/risk.hpp"
#include "optexec/solver.hpp"
#include "optexec/strategy.hpp"

namespace optexec {

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

/// Two-column CSV (x, value), e.g. CDF or density curves.
inline void write_curve_csv(const std::string& path, std::span<const double> x,
                            std::span<const double> value, const std::string& x_name,
                            const std::string& value_name) {
    if (x.size() != value.size()) throw std::invalid_argument("write_curve_csv: length mismatch");
    std::string out = x_name + "," + value_name + "\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        out += format_double(x[i]) + "," + format_double(value[i]) + "\n";
    write_text_file(path, out);
}

inline void write_samples_csv(const std::string& path, std::span<const double> samples) {
    std::string out = "cost\n";
    for (double v : samples) out += format_double(v) + "\n";
    write_text_file(path, out);
}

inline nlohmann::json strategy_to_json(std::span<const double> y) {
    nlohmann::json arr = nlohmann::json::array();
    for (double v : y) arr.push_back(v);
    return arr;
}

inline nlohmann::json beta_to_json(const RedistributionMatrix& beta) {
    nlohmann::json rows = nlohmann::json::array();
    for (int k = 0; k < beta.size(); ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (int i = 0; i < beta.size(); ++i) row.push_back(beta(k, i));
        rows.push_back(row);
    }
    return rows;
}

inline nlohmann::json report_to_json(const RiskReport& r) {
    return {{"mean", r.mean},         {"variance", r.variance}, {"var_alpha", r.var_alpha},
            {"cvar_alpha", r.cvar_alpha}, {"phi", r.phi},       {"alpha", r.alpha},
            {"lambda", r.lambda}};
}

inline nlohmann::json solution_to_json(const MeanCvarSolution& s) {
    return {{"model", "cvar"},
            {"lambda", s.lambda},
            {"y", strategy_to_json(s.y_star.y())},
            {"t_star", s.t_star},
            {"objective", s.objective},
            {"negative_proportions", s.negative_proportions},
            {"diagnostics",
             {{"iterations", s.diagnostics.iterations},
              {"final_step_norm", s.diagnostics.final_step_norm},
              {"converged", s.diagnostics.converged},
              {"restarts", s.diagnostics.restarts_used}}}};
}

inline nlohmann::json solution_to_json(const MeanVarianceSolution& s) {
    return {{"model", "mv"},
            {"lambda_var", s.lambda_var},
            {"n", strategy_to_json(s.n_star)},
            {"y", strategy_to_json(s.y_star)},
            {"objective", s.objective},
            {"kkt_residual", s.kkt_residual},
            {"nonneg_active", s.nonneg_active}};
}

/// Strategy CSV matching the bar-chart layout: one row per period.
inline void write_strategy_csv(const std::string& path, std::span<const double> y) {
    std::string out = "period,y\n";
    for (std::size_t i = 0; i < y.size(); ++i)
        out += std::to_string(i + 1) + "," + format_double(y[i]) + "\n";
    write_text_file(path, out);
}

}  // namespace optexec
