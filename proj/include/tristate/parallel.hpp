#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace tristate {

/// Run fn(i) for i in [0, n) on up to `jobs` threads (0 = hardware default).
/// Chunked static partition; results must go to preallocated slots so the
/// output is independent of the partition.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t jobs = 0) {
    if (n == 0) return;
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    std::size_t k = jobs == 0 ? hw : jobs;
    k = std::min(k, n);
    if (k <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(k);
    std::size_t chunk = (n + k - 1) / k;
    for (std::size_t w = 0; w < k; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace tristate
