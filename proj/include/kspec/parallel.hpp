#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace kspec {

/// Process-wide worker count used by the parallel kernels. Results never
/// depend on it: work is split into index ranges and every reduction is done
/// afterwards in index order.
inline unsigned& thread_count() {
    static unsigned n = 1;
    return n;
}

inline void set_thread_count(unsigned n) { thread_count() = std::max(1u, n); }

/// Calls body(i) for every i in [0, n), statically partitioned over
/// thread_count() workers. body must only write to slots owned by i.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = n * w / workers;
            const std::size_t hi = n * (w + 1) / workers;
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace kspec
