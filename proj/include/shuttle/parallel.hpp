#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace shuttle {

/// Resolves a requested worker count; 0 means one per hardware thread.
inline int resolve_workers(int requested) {
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, rows) into contiguous bands and runs fn(begin, end) on each band.
/// Bands are disjoint, so fn must only write rows inside its band.
template <typename Fn>
void parallel_rows(int rows, int workers, Fn&& fn) {
    workers = std::clamp(workers, 1, std::max(1, rows));
    if (workers == 1) {
        fn(0, rows);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    const int band = (rows + workers - 1) / workers;
    for (int w = 1; w < workers; ++w) {
        const int begin = w * band;
        const int end = std::min(rows, begin + band);
        if (begin >= end)
            break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    fn(0, std::min(rows, band));
}

}  // namespace shuttle
