#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace stratmech::detail {

// Worker cap: MECH_THREADS if set, else hardware concurrency. Results must
// never depend on this value; callers split work into fixed-size chunks and
// merge in chunk order.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("MECH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

// Runs fn(chunk_index) for chunk_index in [0, chunks). Chunk indices are
// handed out in order; with one worker this degenerates to a plain loop.
template <typename Fn>
void parallel_chunks(std::size_t chunks, Fn&& fn) {
    const std::size_t workers = std::min(worker_count(), chunks ? chunks : 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < chunks; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < chunks; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace stratmech::detail
