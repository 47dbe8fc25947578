#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "optexec/risk.hpp"
#include "optexec/rng.hpp"
#include "oracles.hpp"

using namespace optexec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("empirical VaR is the defining order statistic") {
    std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    REQUIRE(empirical_var(s, 0.3) == 7.0);
    REQUIRE(empirical_var(s, 1.0) == 1.0);  // F >= 0 holds everywhere
    const std::vector<double> flat(9, 4.25);
    REQUIRE(empirical_var(flat, 0.42) == 4.25);
    REQUIRE_THROWS_AS(empirical_var(std::vector<double>{}, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(empirical_var(s, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(empirical_var(s, 1.5), std::invalid_argument);
}

TEST_CASE("empirical CVaR closed form") {
    std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    SECTION("integer tail count") { REQUIRE_THAT(empirical_cvar(s, 0.3), WithinRel(9.0, 1e-14)); }
    SECTION("everything in the tail is the mean") {
        REQUIRE_THAT(empirical_cvar(s, 1.0), WithinRel(5.5, 1e-14));
    }
    SECTION("fractional tail weights the boundary statistic") {
        // alpha N = 2.5: (0.5 * 8 + 9 + 10) / 2.5
        REQUIRE_THAT(empirical_cvar(s, 0.25), WithinRel(9.2, 1e-14));
    }
    SECTION("order does not matter") {
        std::vector<double> shuffled{7, 1, 10, 3, 5, 9, 2, 8, 6, 4};
        REQUIRE_THAT(empirical_cvar(shuffled, 0.3), WithinRel(9.0, 1e-14));
    }
}

TEST_CASE("CVaR equals the Rockafellar-Uryasev minimum") {
    std::mt19937_64 gen(51);
    std::lognormal_distribution<double> ln(0.0, 0.8);
    for (double alpha : {0.1, 0.25, 0.3, 0.37, 0.5, 0.9, 1.0}) {
        std::vector<double> s(400);
        for (auto& v : s) v = ln(gen);
        const double closed = empirical_cvar(s, alpha);
        const double searched = oracles::cvar_by_search(s, alpha);
        REQUIRE_THAT(closed, WithinAbs(searched, 1e-9 * std::abs(searched) + 1e-9));
        // the search can only ever be an upper bound up to its resolution
        REQUIRE(closed <= searched + 1e-9);
    }
}

TEST_CASE("CVaR against the analytic normal tail", "[slow]") {
    const size_t n = 1'000'000;
    std::vector<double> s(n);
    for (size_t i = 0; i < n; ++i) s[i] = rng::normal_at(777, 0, i);
    const double want = oracles::normal_cvar(0.0, 1.0, 0.3);  // about 1.159
    REQUIRE_THAT(want, WithinAbs(1.159, 0.001));
    REQUIRE_THAT(empirical_cvar(s, 0.3), WithinAbs(want, 0.01));
}

TEST_CASE("risk report fields are mutually consistent") {
    std::mt19937_64 gen(53);
    std::normal_distribution<double> g(10.0, 2.0);
    std::vector<double> s(5000);
    for (auto& v : s) v = g(gen);

    const auto r = risk_report(s, 0.3, 0.5);
    REQUIRE_THAT(r.phi, WithinRel(0.5 * r.mean + 0.5 * r.cvar_alpha, 1e-14));
    REQUIRE(r.cvar_alpha >= r.var_alpha);
    REQUIRE(r.cvar_alpha >= r.mean);
    const double naive_mean = std::accumulate(s.begin(), s.end(), 0.0) / double(s.size());
    REQUIRE_THAT(r.mean, WithinRel(naive_mean, 1e-12));

    REQUIRE(risk_report(s, 0.3, 0.0).phi == risk_report(s, 0.3, 0.0).mean);
    REQUIRE(risk_report(s, 0.3, 1.0).phi == risk_report(s, 0.3, 1.0).cvar_alpha);
    REQUIRE_THROWS_AS(risk_report(std::vector<double>{1.0}, 0.3, 0.5), std::invalid_argument);

    // reference arithmetic for the trade-off column: 0.5*(2.301e6 + 3.034e6)
    REQUIRE_THAT(0.5 * (2.301e6 + 3.034e6), WithinAbs(2.667e6, 5.01e2));
}

TEST_CASE("tail ordering properties") {
    std::mt19937_64 gen(59);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> s(4001);
    for (auto& v : s) v = g(gen);
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];

    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0}) {
        const double cv = empirical_cvar(s, alpha);
        const double va = empirical_var(s, alpha);
        REQUIRE(cv >= va);
        if (alpha <= 0.5) REQUIRE(va >= median);
        REQUIRE(cv <= prev + 1e-12);  // nonincreasing in alpha
        prev = cv;
    }
}

TEST_CASE("CVaR is subadditive on paired samples") {
    std::mt19937_64 gen(61);
    std::normal_distribution<double> g(0.0, 3.0);
    std::lognormal_distribution<double> ln(0.0, 0.5);
    for (int trial = 0; trial < 100; ++trial) {
        const size_t n = 100 + gen() % 400;
        std::vector<double> a(n), b(n), apb(n);
        for (size_t i = 0; i < n; ++i) {
            a[i] = g(gen);
            b[i] = ln(gen) - 0.3 * a[i];
            apb[i] = a[i] + b[i];
        }
        const double alpha = 0.05 + 0.9 * double(trial) / 100.0;
        REQUIRE(empirical_cvar(apb, alpha) <=
                empirical_cvar(a, alpha) + empirical_cvar(b, alpha) + 1e-9);
    }
}

TEST_CASE("empirical CDF evaluation") {
    std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const std::vector<double> grid{0.0, 5.0, 10.0, 11.0};
    const auto f = empirical_cdf(s, grid);
    REQUIRE(f[0] == 0.0);
    REQUIRE(f[1] == 0.5);
    REQUIRE(f[2] == 1.0);
    REQUIRE(f[3] == 1.0);
    for (size_t i = 1; i < f.size(); ++i) REQUIRE(f[i] >= f[i - 1]);
    REQUIRE_THROWS_AS(empirical_cdf(s, std::vector<double>{2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("stochastic dominance verdicts") {
    std::vector<double> base(2000);
    for (size_t i = 0; i < base.size(); ++i) base[i] = rng::normal_at(5, 1, i);
    std::vector<double> grid;
    for (double x = -8.0; x <= 8.0; x += 0.05) grid.push_back(x);

    SECTION("a distribution dominates itself") {
        const auto r = sd1_dominates(base, base, grid, 0.0);
        REQUIRE(r.dominates);
        REQUIRE(r.max_violation == 0.0);
    }
    SECTION("a positive shift is dominated") {
        std::vector<double> shifted = base;
        for (auto& v : shifted) v += 0.75;
        REQUIRE(sd1_dominates(base, shifted, grid, 0.0).dominates);
        REQUIRE_FALSE(sd1_dominates(shifted, base, grid, 0.0).dominates);
    }
    SECTION("crossing CDFs dominate in neither direction") {
        std::vector<double> wide(base.size());
        for (size_t i = 0; i < wide.size(); ++i) wide[i] = 2.0 * rng::normal_at(6, 1, i);
        REQUIRE_FALSE(sd1_dominates(base, wide, grid, 0.0).dominates);
        REQUIRE_FALSE(sd1_dominates(wide, base, grid, 0.0).dominates);
    }
}

TEST_CASE("histogram conserves mass") {
    SECTION("single bin") {
        std::vector<double> s{1.0, 2.0, 3.0};
        const auto h = histogram(s, 1);
        REQUIRE(h.edges.front() == 1.0);
        REQUIRE(h.edges.back() == 3.0);
        REQUIRE_THAT(h.density[0], WithinRel(0.5, 1e-14));  // 1 / width
    }
    SECTION("degenerate support gets unit width") {
        std::vector<double> s(10, 4.0);
        const auto h = histogram(s, 1);
        REQUIRE_THAT(h.density[0] * (h.edges[1] - h.edges[0]), WithinRel(1.0, 1e-12));
    }
    SECTION("uniform samples are flat") {
        const size_t n = 100000;
        std::vector<double> s(n);
        for (size_t i = 0; i < n; ++i)
            s[i] = rng::uniform_open(rng::splitmix64_at(1234, i));
        const auto h = histogram(s, 20);
        for (double d : h.density) REQUIRE_THAT(d, WithinAbs(1.0, 0.1));
    }
    SECTION("mass is one on random data") {
        std::mt19937_64 gen(67);
        std::lognormal_distribution<double> ln(1.0, 1.0);
        std::vector<double> s(5000);
        for (auto& v : s) v = ln(gen);
        const auto h = histogram(s, 37);
        double mass = 0.0;
        for (size_t b = 0; b < h.density.size(); ++b)
            mass += h.density[b] * (h.edges[b + 1] - h.edges[b]);
        REQUIRE_THAT(mass, WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("DKW band shrinks with the sample count") {
    REQUIRE_THAT(dkw_band(1'000'000), WithinRel(std::sqrt(std::log(200.0) / 2e6), 1e-12));
    REQUIRE(dkw_band(100) > dkw_band(10000));
}
