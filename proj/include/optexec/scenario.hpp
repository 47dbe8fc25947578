#pragma once

// Joint realizations of price shocks (xi) and demand-forecast updates
// (delta), generation of seeded batches, and their binary on-disk format.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "optexec/market.hpp"
#include "optexec/parallel.hpp"
#include "optexec/rng.hpp"

namespace optexec {

/// One joint outcome: xi has length m, delta has length m with delta[m-1]
/// identically zero (the final forecast equals the realized demand).
struct Scenario {
    std::vector<double> xi;
    std::vector<double> delta;
};

/// Non-owning view of one path inside a ScenarioSet.
struct ScenarioView {
    std::span<const double> xi;
    std::span<const double> delta;
    ScenarioView() = default;
    ScenarioView(std::span<const double> x, std::span<const double> d) : xi(x), delta(d) {}
    ScenarioView(const Scenario& s) : xi(s.xi), delta(s.delta) {}  // NOLINT(google-explicit-constructor)
};

/// FNV-1a hash over the canonical byte layout of the generating parameters.
inline std::uint64_t params_fingerprint(const MarketParams& p) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    auto mix_u32 = [&](std::uint32_t v) { mix(&v, sizeof v); };
    auto mix_f64 = [&](double v) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        mix(&bits, sizeof bits);
    };
    mix_u32(static_cast<std::uint32_t>(p.m));
    for (double v : p.tau) mix_f64(v);
    for (double v : p.sigma) mix_f64(v);
    for (double v : p.epsilon) mix_f64(v);
    for (double v : p.eta) mix_f64(v);
    mix_f64(p.gamma);
    mix_f64(p.d0);
    for (double v : p.nu) mix_f64(v);
    mix_f64(p.alpha);
    mix_f64(p.s0);
    return h;
}

/// A seeded batch of scenarios, stored flat: per path m xi values followed
/// by m delta values. Immutable after creation; shareable across threads.
class ScenarioSet {
public:
    ScenarioSet(int m, std::size_t n_paths, std::uint64_t seed, std::uint64_t fingerprint,
                std::vector<double> data)
        : m_(m), n_(n_paths), seed_(seed), fingerprint_(fingerprint), data_(std::move(data)) {
        if (m_ < 1) throw std::invalid_argument("ScenarioSet: m must be >= 1");
        if (n_ < 1) throw std::invalid_argument("ScenarioSet: need at least one path");
        if (data_.size() != 2 * static_cast<std::size_t>(m_) * n_)
            throw std::invalid_argument("ScenarioSet: data size mismatch");
    }

    int m() const { return m_; }
    std::size_t size() const { return n_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t fingerprint() const { return fingerprint_; }
    const std::vector<double>& raw() const { return data_; }

    ScenarioView view(std::size_t path) const {
        const auto mm = static_cast<std::size_t>(m_);
        const double* base = data_.data() + path * 2 * mm;
        return {{base, mm}, {base + mm, mm}};
    }

    Scenario at(std::size_t path) const {
        auto v = view(path);
        return {{v.xi.begin(), v.xi.end()}, {v.delta.begin(), v.delta.end()}};
    }

private:
    int m_;
    std::size_t n_;
    std::uint64_t seed_;
    std::uint64_t fingerprint_;
    std::vector<double> data_;
};

/// Draw n_paths joint scenarios: xi_i ~ N(0, sigma_i^2) i.i.d., delta_i ~
/// N(0, nu_i^2) for i < m-1, delta_{m-1} = 0. Path p consumes the fixed
/// counter range [0, 2m-1) of its own substream, which makes generation
/// embarrassingly parallel and gives the prefix property: the first n paths
/// of a larger batch with the same seed are bit-identical.
inline ScenarioSet generate(const MarketParams& p, std::size_t n_paths, std::uint64_t seed) {
    p.validate();
    if (n_paths < 1) throw std::invalid_argument("generate: n_paths must be >= 1");
    const auto m = static_cast<std::size_t>(p.m);
    std::vector<double> data(2 * m * n_paths);
    par::for_chunks(n_paths, par::default_chunk, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t path = b; path < e; ++path) {
            const std::uint64_t sseed = rng::stream_seed(seed, path);
            double* xi = data.data() + path * 2 * m;
            double* delta = xi + m;
            for (std::size_t i = 0; i < m; ++i)
                xi[i] = p.sigma[i] *
                        rng::normal_quantile(rng::uniform_open(rng::splitmix64_at(sseed, i)));
            for (std::size_t i = 0; i + 1 < m; ++i)
                delta[i] = p.nu[i] *
                           rng::normal_quantile(rng::uniform_open(rng::splitmix64_at(sseed, m + i)));
            delta[m - 1] = 0.0;
        }
    });
    return {p.m, n_paths, seed, params_fingerprint(p), std::move(data)};
}

/// Forecast path D_0..D_m: D_i = D_{i-1} + delta_i, D_m = D_{m-1} = d_T.
inline std::vector<double> demand_path(const MarketParams& p, const ScenarioView& s) {
    const auto m = static_cast<std::size_t>(p.m);
    if (s.delta.size() != m) throw std::invalid_argument("demand_path: scenario length mismatch");
    std::vector<double> d(m + 1);
    d[0] = p.d0;
    for (std::size_t i = 0; i < m; ++i) d[i + 1] = d[i] + s.delta[i];
    return d;
}

// --- binary scenario file ---------------------------------------------
// Little-endian layout: magic "EXSC", version u32, m u32, N u64, seed u64,
// fingerprint u64, then N * 2m float64 (xi then delta per path).

namespace detail {
inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint32_t get_u32(const unsigned char* b) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
inline std::uint64_t get_u64(const unsigned char* b) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
}  // namespace detail

inline constexpr std::uint32_t scenario_file_version = 1;

inline void save_scenarios(const ScenarioSet& set, const std::string& path) {
    std::string header;
    header.reserve(36);
    header += "EXSC";
    detail::put_u32(header, scenario_file_version);
    detail::put_u32(header, static_cast<std::uint32_t>(set.m()));
    detail::put_u64(header, static_cast<std::uint64_t>(set.size()));
    detail::put_u64(header, set.seed());
    detail::put_u64(header, set.fingerprint());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_scenarios: cannot open " + path);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::string body;
    body.reserve(set.raw().size() * 8);
    for (double v : set.raw()) detail::put_u64(body, std::bit_cast<std::uint64_t>(v));
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error("save_scenarios: write failed for " + path);
}

inline ScenarioSet load_scenarios(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_scenarios: cannot open " + path);
    unsigned char header[36];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (in.gcount() != sizeof header)
        throw std::runtime_error("load_scenarios: truncated header in " + path);
    if (std::memcmp(header, "EXSC", 4) != 0)
        throw std::runtime_error("load_scenarios: bad magic in " + path);
    const std::uint32_t version = detail::get_u32(header + 4);
    if (version != scenario_file_version)
        throw std::runtime_error("load_scenarios: unsupported version in " + path);
    const std::uint32_t m = detail::get_u32(header + 8);
    const std::uint64_t n = detail::get_u64(header + 12);
    const std::uint64_t seed = detail::get_u64(header + 20);
    const std::uint64_t fp = detail::get_u64(header + 28);
    if (m < 1 || n < 1) throw std::runtime_error("load_scenarios: empty set in " + path);

    const std::size_t count = 2 * static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
    std::vector<unsigned char> bytes(count * 8);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
        throw std::runtime_error("load_scenarios: truncated payload in " + path);
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i)
        data[i] = std::bit_cast<double>(detail::get_u64(bytes.data() + 8 * i));
    return {static_cast<int>(m), static_cast<std::size_t>(n), seed, fp, std::move(data)};
}

/// True when the stored fingerprint matches the given parameters. A mismatch
/// is a warning condition, not an error: the data may still be usable.
inline bool fingerprint_matches(const ScenarioSet& set, const MarketParams& p) {
    return set.fingerprint() == params_fingerprint(p);
}

}  // namespace optexec
