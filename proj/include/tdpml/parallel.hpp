#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tdpml {

/// Number of workers for a requested job count (0 means hardware concurrency).
inline int resolve_jobs(int jobs)
{
    if (jobs > 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Runs fn(worker, index) for index in [0, n) on up to `jobs` threads.
 * Indices are claimed dynamically; results must be written by index so the
 * outcome does not depend on scheduling. The first exception is rethrown.
 * make_state(worker) is called once per worker before any work item.
 */
template <class MakeState, class Fn>
void parallel_for(int n, int jobs, MakeState make_state, Fn fn)
{
    const int workers = std::max(1, std::min(resolve_jobs(jobs), n));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&](int w) {
        try {
            auto state = make_state(w);
            for (int i = next++; i < n; i = next++) {
                fn(state, i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
        }
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

template <class Fn>
void parallel_for(int n, int jobs, Fn fn)
{
    parallel_for(n, jobs, [](int) { return 0; }, [&](int&, int i) { fn(i); });
}

}  // namespace tdpml
