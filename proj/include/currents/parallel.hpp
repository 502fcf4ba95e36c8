#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace currents {

// Thread cap from CURRENTS_THREADS (0 or unset = hardware concurrency).
inline unsigned thread_limit() {
    if (const char* env = std::getenv("CURRENTS_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

// Runs fn(i) for i in [0, n). Each index writes only its own slot, so results
// are identical for any thread count; callers reduce over i afterwards in
// index order.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned nt = thread_limit();
    if (nt <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, n));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace currents
