#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace netfactor {

/// Thread count: `requested` when positive, else NETFACTOR_THREADS, else 1.
int resolve_threads(int requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers with a static
/// contiguous partition. Each index is processed exactly once; results must be
/// written to per-index slots so the outcome does not depend on `threads`.
/// The first exception thrown by any worker is rethrown after all join.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
    if (count == 0) return;
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(count, threads > 0 ? static_cast<std::size_t>(threads) : 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failureMutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failureMutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace netfactor
