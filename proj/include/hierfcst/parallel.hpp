#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hierfcst {

//! Calls fn(k) for k in [0, n) on up to `jobs` threads. Tasks must write to
//! disjoint outputs; the first exception is rethrown after all threads stop.
template<typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) {
            fn(k);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) {
                try {
                    fn(k);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& thread : pool) {
        thread.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace hierfcst
