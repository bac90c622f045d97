#ifndef GDRO_PARALLEL_HPP
#define GDRO_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gdro {

struct Execution {
    int threads = 1;
};

/// Runs body(k) for k in [0, n) split into contiguous blocks, one per worker.
/// Each index is written by exactly one worker, so results do not depend on
/// the worker count as long as body(k) only touches slot k.
template <class Body>
void parallel_for(std::size_t n, const Execution& exec, Body&& body) {
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, exec.threads)));
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) body(k);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run_block = [&](std::size_t w) {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        try {
            for (std::size_t k = lo; k < hi; ++k) body(k);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run_block, w);
        run_block(0);
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace gdro

#endif  // GDRO_PARALLEL_HPP
