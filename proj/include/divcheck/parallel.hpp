#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace divcheck {

/// Evaluates fn(i) for i in [0, count) on `workers` threads.  Slot i of the
/// result always holds fn(i), so the output is independent of scheduling.
template <class Fn>
auto parallel_map(std::size_t count, unsigned workers, Fn&& fn) {
    using T = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<T> out(count);
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    // interleaved indices balance the cost gradient along grids
                    for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace divcheck
