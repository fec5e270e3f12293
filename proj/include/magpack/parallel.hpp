#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace magpack {

// Fixed chunk count so reductions are independent of the worker count.
inline constexpr int kChunks = 16;

inline int default_workers() {
    static int w = std::max(1u, std::thread::hardware_concurrency());
    return w;
}

// Runs fn(chunk) for chunk in [0, chunks) on up to `workers` threads.
// Rethrows the first exception.
inline void parallel_chunks(int chunks, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, chunks));
    if (workers == 1) {
        for (int c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int c = next.fetch_add(1);
                if (c >= chunks) return;
                try {
                    fn(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// [begin, end) of chunk c when splitting n items into `chunks` pieces.
inline std::pair<std::size_t, std::size_t> chunk_range(std::size_t n, int chunks, int c) {
    const std::size_t b = n * static_cast<std::size_t>(c) / chunks;
    const std::size_t e = n * static_cast<std::size_t>(c + 1) / chunks;
    return {b, e};
}

}  // namespace magpack
