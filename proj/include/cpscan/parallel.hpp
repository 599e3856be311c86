#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace cpscan {

/// Resolve a requested thread count: 0 means "use the hardware", anything
/// else is taken literally.  Always returns >= 1.
inline int resolve_threads(int requested) {
    if (requested < 0) throw std::invalid_argument("thread count must be >= 0");
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/**
 * Run fn(i) for i in [0, count) on up to `threads` workers.
 *
 * Work is handed out in contiguous blocks.  Callers store per-index results
 * into preallocated slots and reduce sequentially afterwards, which makes
 * every campaign bit-identical for any thread count.
 */
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
    const int nw = resolve_threads(threads);
    if (nw <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(nw, count);
    const std::size_t base = count / workers, extra = count % workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t len = base + (w < extra ? 1 : 0);
        const std::size_t end = begin + len;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
        begin = end;
    }
    for (auto& t : pool) t.join();
}

} // namespace cpscan
