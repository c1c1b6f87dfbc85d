#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace riskscope {

// Number of worker threads: hardware concurrency clamped to [1, 16], or the
// RISKSCOPE_THREADS environment override.
inline int worker_count() {
    if (const char* env = std::getenv("RISKSCOPE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return std::min(n, 64);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

// Runs fn(i) for i in [0, n).  Each task must write only to its own output
// slot, so the result of a parallel map never depends on the schedule.  The
// first exception (by task index) is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
    if (n <= 0) return;
    const int workers = static_cast<int>(
        std::min<std::int64_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::pair<std::int64_t, std::exception_ptr>> failures(
        static_cast<std::size_t>(workers), {n, nullptr});
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    auto& slot = failures[static_cast<std::size_t>(w)];
                    if (i < slot.first) slot = {i, std::current_exception()};
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    std::exception_ptr first;
    std::int64_t first_index = n;
    for (const auto& [index, err] : failures) {
        if (err && index < first_index) {
            first_index = index;
            first = err;
        }
    }
    if (first) std::rethrow_exception(first);
}

// Pairwise (cascade) summation: depends only on the values in index order,
// never on the thread schedule, and the rounding error grows like log(n).
inline double pairwise_sum(const double* data, std::size_t len) {
    if (len == 0) return 0.0;
    if (len <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += data[i];
        return s;
    }
    const std::size_t half = len / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, len - half);
}

inline double pairwise_sum(const std::vector<double>& values) {
    return pairwise_sum(values.data(), values.size());
}

inline double pairwise_mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    return pairwise_sum(values) / static_cast<double>(values.size());
}

}  // namespace riskscope
