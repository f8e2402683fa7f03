#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace flockkit {

/// Worker count from FLOCKKIT_THREADS (0 or unset = hardware concurrency).
inline std::size_t thread_count() {
    static const std::size_t count = [] {
        std::size_t requested = 0;
        if (const char* env = std::getenv("FLOCKKIT_THREADS")) {
            try {
                requested = static_cast<std::size_t>(std::stoul(env));
            } catch (...) {
                requested = 0;
            }
        }
        if (requested == 0) {
            requested = std::max(1u, std::thread::hardware_concurrency());
        }
        return requested;
    }();
    return count;
}

/// Runs body(k) for k in [0, n). Iterations must write disjoint outputs; there is
/// no reduction, so results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 16) {
    const std::size_t workers = std::min(thread_count(), n / std::max<std::size_t>(min_chunk, 1));
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) body(k);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (std::size_t k = begin; k < end; ++k) body(k);
        });
    }
}

} // namespace flockkit
