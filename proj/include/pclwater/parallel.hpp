#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace pclwater {

// Runs fn(i) for i in [0,n) on up to `threads` workers. Callers stay
// deterministic by writing into per-index slots and reducing in index order.
template <class F>
void parallel_for(int n, int threads, F&& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n);
    pool.reserve(std::size_t(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
}

} // namespace pclwater
