#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

#include "projcvm/types.hpp"

namespace projcvm {

// Worker count: explicit request wins, then PROJCVM_THREADS (0 = auto),
// then hardware concurrency.
inline int thread_count(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PROJCVM_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {
// Chunk size depends only on n, so the chunk partition (and therefore any
// per-chunk reduction order) is independent of the worker count.
inline Index chunk_size_for(Index n) {
    const Index target_chunks = 512;
    Index c = (n + target_chunks - 1) / target_chunks;
    return c < 1 ? 1 : c;
}
}  // namespace detail

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed chunks.
// Chunks are claimed dynamically but identified by index, so callers that
// store per-chunk results get scheduling-independent output.
template <typename Fn>
void parallel_chunks(Index n, int threads, Fn&& fn) {
    if (n <= 0) return;
    const Index chunk = detail::chunk_size_for(n);
    const Index n_chunks = (n + chunk - 1) / chunk;
    const int workers = std::min<Index>(thread_count(threads), n_chunks);
    if (workers <= 1) {
        for (Index c = 0; c < n_chunks; ++c) {
            fn(c, c * chunk, std::min(n, (c + 1) * chunk));
        }
        return;
    }
    std::atomic<Index> next{0};
    auto run = [&] {
        for (;;) {
            const Index c = next.fetch_add(1);
            if (c >= n_chunks) return;
            fn(c, c * chunk, std::min(n, (c + 1) * chunk));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

// Pairwise (tree) reduction of f(0), ..., f(n-1).
template <typename Fn>
double pairwise_sum(Index begin, Index end, Fn&& f) {
    const Index n = end - begin;
    if (n <= 0) return 0.0;
    if (n <= 32) {
        double s = 0.0;
        for (Index i = begin; i < end; ++i) s += f(i);
        return s;
    }
    const Index mid = begin + n / 2;
    return pairwise_sum(begin, mid, f) + pairwise_sum(mid, end, f);
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(0, static_cast<Index>(v.size()), [&](Index i) { return v[static_cast<std::size_t>(i)]; });
}

// Parallel pairwise sum of f(i) over [0, n); deterministic for a given n.
template <typename Fn>
double parallel_pairwise_sum(Index n, int threads, Fn&& f) {
    if (n <= 0) return 0.0;
    const Index chunk = detail::chunk_size_for(n);
    const Index n_chunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(static_cast<std::size_t>(n_chunks), 0.0);
    parallel_chunks(n, threads, [&](Index c, Index b, Index e) { partial[static_cast<std::size_t>(c)] = pairwise_sum(b, e, f); });
    return pairwise_sum(partial);
}

}  // namespace projcvm
