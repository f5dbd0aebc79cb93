#pragma once

// Bounded worker pool for embarrassingly parallel sweeps. Work items are
// indexed and results land in caller-owned slots, so output is deterministic
// for any worker count. CAVITY_HERALD_THREADS bounds the pool.

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace spinphoton {

inline unsigned max_threads() {
    if (const char* env = std::getenv("CAVITY_HERALD_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
    const unsigned workers = std::min<std::size_t>(max_threads(), n ? n : 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace spinphoton
