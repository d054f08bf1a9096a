#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ergolab {

// Worker cap from ERGOLAB_THREADS; defaults to a single worker.
inline int env_worker_count() {
    const char* env = std::getenv("ERGOLAB_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    if (v < 1) return 1;
    return std::min(v, 64);
}

// Runs fn(begin, end, slot) over contiguous index ranges covering [0, n).
// Estimators accumulate integer counts per slot and merge them afterwards,
// so the result is identical for every worker count.
template <class Fn>
void for_index_ranges(std::int64_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        fn(std::int64_t(0), n, 0);
        return;
    }
    int slots = static_cast<int>(std::min<std::int64_t>(workers, n));
    std::int64_t chunk = (n + slots - 1) / slots;
    std::vector<std::thread> pool;
    for (int s = 0; s < slots; ++s) {
        std::int64_t begin = static_cast<std::int64_t>(s) * chunk;
        std::int64_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, s, &fn] { fn(begin, end, s); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ergolab
