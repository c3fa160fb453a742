#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace callias {

// Runs body(i) for i in [0, n) on up to `workers` threads. Callers write results into
// slot i, so merges happen in index order. The first exception (lowest index) is rethrown.
template <class Body>
void parallel_for(int n, int workers, Body body)
{
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[static_cast<size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace callias
