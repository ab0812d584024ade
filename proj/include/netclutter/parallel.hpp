#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace netclutter {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs body(index, worker) for index in [0, count). Work is handed out through
// a shared atomic counter so long items do not stall a fixed block. worker is
// a dense id in [0, threads), letting callers keep per-worker scratch. With a
// single thread everything runs inline on the calling thread.
template <typename Body>
void parallel_for(std::int64_t count, int threads, Body&& body) {
    threads = resolve_threads(threads);
    if (count <= 0) return;
    if (threads == 1 || count == 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i, 0);
        return;
    }
    if (static_cast<std::int64_t>(threads) > count) threads = static_cast<int>(count);
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto run = [&](int worker) {
        for (;;) {
            const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                body(i, worker);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                next.store(count, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads) - 1);
    for (int w = 1; w < threads; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace netclutter
