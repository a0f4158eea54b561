#pragma once
// Minimal static-partition parallel loop. Thread count comes from QBM_THREADS
// (capped at hardware concurrency); partitioning is deterministic so reduction
// order never depends on scheduling.

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace qbm {

inline int thread_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("QBM_THREADS")) {
        const int req = std::atoi(env);
        if (req >= 1) return req < hw ? req : hw;
    }
    return hw;
}

// calls fn(begin, end) on contiguous chunks of [0, n), one per worker
inline void parallel_chunks(long n, const std::function<void(long, long)>& fn) {
    const int nt = thread_count();
    if (n <= 0) return;
    if (nt == 1 || n < 2 * nt) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nt));
    const long chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        const long a = t * chunk;
        const long b = std::min(n, a + chunk);
        if (a >= b) break;
        pool.emplace_back(fn, a, b);
    }
    for (auto& th : pool) th.join();
}

} // namespace qbm
