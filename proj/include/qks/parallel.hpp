#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qks {

/// Worker count: QKS_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
inline unsigned worker_count() {
    if (const char *env = std::getenv("QKS_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n > 0) { return static_cast<unsigned>(n); }
        } catch (const std::exception &) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on a bounded pool. Tasks must write to
/// disjoint outputs; the first exception thrown is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t count, Fn &&fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(worker_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) { fn(i); }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) { failure = std::current_exception(); }
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) { pool.emplace_back(body); }
    for (auto &t : pool) { t.join(); }
    if (failure) { std::rethrow_exception(failure); }
}

} // namespace qks
