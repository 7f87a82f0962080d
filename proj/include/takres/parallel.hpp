#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace takres {

inline long default_workers() {
    if (const char* env = std::getenv("TAKRES_WORKERS")) {
        const long n = std::atol(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<long>(hc) : 1;
}

/// Run fn(i) for i in [0, n) on up to `workers` threads (0 = default).
/// Work items must be independent; exceptions propagate from the first
/// failing item.
inline void parallel_for(long n, long workers, const std::function<void(long)>& fn) {
    if (workers <= 0) workers = default_workers();
    if (workers == 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const long n_threads = std::min(workers, n);
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (long t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace takres
