#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace evdeg {

inline unsigned resolve_threads(unsigned requested, std::size_t work_items) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    unsigned t = requested == 0 ? hw : requested;
    if (work_items < t) t = static_cast<unsigned>(std::max<std::size_t>(work_items, 1));
    return t;
}

/// Runs body(index) for index in [0, n) on up to `threads` workers.
/// Each index is processed exactly once and must write only to its own
/// result slot; reductions happen sequentially afterwards, which keeps
/// outputs bit-identical across thread counts.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
    if (n == 0) return;
    const unsigned t = resolve_threads(threads, n);
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::vector<std::exception_ptr> errors(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (unsigned w = 0; w < t; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([&, w, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace evdeg
