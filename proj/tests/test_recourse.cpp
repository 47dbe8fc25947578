#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "optexec/recourse.hpp"

using namespace optexec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("no forecast updates means no re-planning") {
    const auto p = make_preset('a');
    const Scenario s{std::vector<double>(5, 0.3), std::vector<double>(5, 0.0)};
    for (double lv : {0.0, 1e-6, 1e-4}) {
        const auto rec = simulate_recourse(p, lv, s);
        const auto t0 = solve_mean_variance(p, p.d0, lv);
        // re-solve roundoff lives at the scale of the remaining demand
        for (size_t i = 0; i < 5; ++i)
            REQUIRE_THAT(rec.volumes[i], WithinAbs(t0.n_star[i], 1e-10 * p.d0));
    }
}

TEST_CASE("two-period recourse forces the residual into the last trade") {
    auto p = make_preset('a');
    p.m = 2;
    p.tau = {1.0, 1.0};
    p.sigma = {0.95, 0.95};
    p.epsilon = {0.0625, 0.0625};
    p.eta = {2.5e-6, 2.5e-6};
    p.nu = {5e4};
    const Scenario s{{0.1, -0.4}, {3e4, 0.0}};
    const auto rec = simulate_recourse(p, 1e-6, s);
    const auto t0 = solve_mean_variance(p, p.d0, 1e-6);
    REQUIRE_THAT(rec.volumes[0], WithinRel(t0.n_star[0], 1e-12));
    REQUIRE_THAT(rec.volumes[1], WithinRel(p.d0 + 3e4 - t0.n_star[0], 1e-12));
    REQUIRE_THAT(rec.volumes[0] + rec.volumes[1], WithinRel(p.d0 + 3e4, 1e-12));
    REQUIRE_THAT(rec.cost, WithinRel(cost_simplified(p, rec.volumes, s), 1e-15));
}

TEST_CASE("cumulative recourse volume always hits the realized demand") {
    const auto p = make_preset('b');
    const auto set = generate(p, 400, 13);
    for (double lv : {0.0, 1e-5}) {
        for (size_t i = 0; i < set.size(); i += 7) {
            const auto view = set.view(i);
            const auto rec = simulate_recourse(p, lv, view);
            double d_T = p.d0;
            for (double d : view.delta) d_T += d;
            double total = 0.0;
            for (double n : rec.volumes) total += n;
            REQUIRE_THAT(total, WithinRel(d_T, 1e-9));
        }
    }
}

TEST_CASE("re-solving equals the rescaled continuation under constant epsilon") {
    // Audit of the time-homogeneity shortcut: the full KKT re-solve at each
    // decision time must match trading continuation(y_t0, i)[0] of the
    // remaining demand.
    const auto p = make_preset('a');
    const auto set = generate(p, 200, 21);
    for (double lv : {0.0, 1e-6, 1e-4}) {
        const auto t0 = solve_mean_variance(p, p.d0, lv);
        const Strategy y0{std::vector<double>(t0.y_star)};
        for (size_t s = 0; s < set.size(); s += 11) {
            const auto view = set.view(s);
            const auto rec = simulate_recourse(p, lv, view);
            double forecast = p.d0, traded = 0.0;
            for (int i = 0; i < p.m; ++i) {
                if (i > 0) forecast += view.delta[(size_t)i - 1];
                const double remaining = forecast - traded;
                const double shortcut = continuation(y0, i)[0] * remaining;
                REQUIRE_THAT(rec.volumes[(size_t)i],
                             WithinAbs(shortcut, 1e-8 * std::abs(remaining) + 1e-8));
                traded += rec.volumes[(size_t)i];
            }
        }
    }
}

TEST_CASE("static strategy with implied redistribution reproduces recourse") {
    const auto p = make_preset('a');
    const auto set = generate(p, 1000, 34);

    SECTION("risk-neutral: uniform strategy and even redistribution") {
        const auto eq = reproduce_with_static(p, 0.0);
        REQUIRE(eq.epsilon_constant);
        for (size_t i = 0; i < 5; ++i) REQUIRE_THAT(eq.y[i], WithinRel(0.2, 1e-10));
        for (int k = 0; k + 1 < 5; ++k)
            for (int i = k + 1; i < 5; ++i)
                REQUIRE_THAT(eq.beta(k, i), WithinRel(1.0 / (4 - k), 1e-9));
        for (size_t s = 0; s < set.size(); ++s) {
            const auto view = set.view(s);
            const auto stat = volumes(eq.y, eq.beta, p.d0, view);
            const auto rec = simulate_recourse(p, 0.0, view);
            for (size_t i = 0; i < 5; ++i)
                REQUIRE_THAT(stat.n[i], WithinAbs(rec.volumes[i], 1e-8 * p.d0));
        }
    }

    SECTION("risk-averse instance") {
        const auto eq = reproduce_with_static(p, 1e-6);
        for (size_t s = 0; s < set.size(); ++s) {
            const auto view = set.view(s);
            const auto stat = volumes(eq.y, eq.beta, p.d0, view);
            const auto rec = simulate_recourse(p, 1e-6, view);
            for (size_t i = 0; i < 5; ++i) {
                const double scale = std::max(std::abs(rec.volumes[i]), 1.0);
                REQUIRE_THAT(stat.n[i], WithinAbs(rec.volumes[i], 1e-8 * scale));
            }
        }
    }

    SECTION("single period is trivially equal") {
        MarketParams q;
        q.m = 1;
        q.tau = {1.0};
        q.sigma = {0.95};
        q.epsilon = {0.0625};
        q.eta = {2.5e-6};
        q.gamma = 4e-6;
        q.d0 = 1e6;
        q.alpha = 0.3;
        const Scenario s{{0.5}, {0.0}};
        const auto rec = simulate_recourse(q, 1e-6, s);
        REQUIRE(rec.volumes == std::vector<double>{1e6});
    }

    SECTION("non-constant epsilon is flagged") {
        auto q = make_preset('b');
        const auto eq = reproduce_with_static(q, 1e-6);
        REQUIRE_FALSE(eq.epsilon_constant);
    }
}

TEST_CASE("recourse risk profile moves as the aversion grows", "[slow]") {
    const auto p = make_preset('a');
    const auto set = generate(p, 100000, 55);
    double prev_mean = -std::numeric_limits<double>::infinity();
    double prev_var = std::numeric_limits<double>::infinity();
    for (double lv : {0.0, 1e-7, 1e-6, 1e-5, 1e-4}) {
        const auto costs = recourse_costs(p, lv, set);
        const auto rep = risk_report(costs, p.alpha, 0.0);
        REQUIRE(rep.mean >= prev_mean);
        REQUIRE(rep.variance <= prev_var);
        prev_mean = rep.mean;
        prev_var = rep.variance;
    }
}
