#pragma once

// Deterministic chunked parallelism. Work is split into fixed-size chunks
// addressed by index; per-chunk results are merged in chunk order, so the
// outcome is independent of how many threads ran.

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace optexec::par {

inline int& max_threads_ref() {
    static int n = static_cast<int>(std::thread::hardware_concurrency());
    return n;
}

inline void set_max_threads(int n) { max_threads_ref() = n > 0 ? n : 1; }

inline std::size_t chunk_count(std::size_t n, std::size_t chunk) {
    return (n + chunk - 1) / chunk;
}

/// Apply f(chunk_index, begin, end) over [0, n) in chunks of size `chunk`.
/// f must only write to state owned by its chunk index.
template <typename F>
void for_chunks(std::size_t n, std::size_t chunk, F&& f) {
    if (n == 0) return;
    const std::size_t n_chunks = chunk_count(n, chunk);
    const int n_threads =
        static_cast<int>(std::min<std::size_t>(std::max(1, max_threads_ref()), n_chunks));
    if (n_threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            f(c, c * chunk, std::min(n, (c + 1) * chunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            f(c, c * chunk, std::min(n, (c + 1) * chunk));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads) - 1);
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

/// Map each chunk to a value with g(begin, end) -> T and return the values
/// in chunk order. Reducing the returned vector sequentially gives a result
/// that does not depend on the thread count.
template <typename T, typename G>
std::vector<T> map_chunks(std::size_t n, std::size_t chunk, G&& g) {
    std::vector<T> out(chunk_count(n, chunk));
    for_chunks(n, chunk, [&](std::size_t c, std::size_t b, std::size_t e) { out[c] = g(b, e); });
    return out;
}

/// Ordered sum of per-chunk partial sums of g(i).
template <typename G>
double sum_chunks(std::size_t n, std::size_t chunk, G&& g) {
    auto partials = map_chunks<double>(n, chunk, [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += g(i);
        return s;
    });
    double s = 0.0;
    for (double p : partials) s += p;
    return s;
}

inline constexpr std::size_t default_chunk = 8192;

}  // namespace optexec::par
