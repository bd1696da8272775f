#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace hetpol {

/// Worker count from HETPOL_WORKERS when `requested` <= 0, else `requested`.
int resolve_workers(int requested);

/// Evaluates fn(i) for i in [0, count) on a fixed pool of `workers`
/// threads and returns the results in index order. Jobs must derive any
/// randomness from their index, which makes the output independent of
/// scheduling. The exception of the lowest failing index is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, int workers, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using R = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<R> out(count);
    const auto pool = static_cast<std::size_t>(std::max(1, workers));
    if (pool == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = count;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::jthread> threads;
    threads.reserve(std::min(pool, count));
    for (std::size_t t = 0; t < std::min(pool, count); ++t) threads.emplace_back(worker);
    threads.clear();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace hetpol
