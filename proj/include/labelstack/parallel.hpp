#pragma once

#include "labelstack/execution.hpp"

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace labelstack {

/// Runs body(i) for i in [0, n). Under Parallel the iterations are spread
/// over OpenMP threads; an exception thrown by any iteration is captured and
/// the one from the lowest index is rethrown after the loop, so failures
/// surface the same way on both paths.
template <typename Body>
void for_each_index(std::size_t n, Execution exec, Body&& body)
{
    if (exec == Execution::Serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

/// Set the OpenMP thread count for subsequent parallel regions.
void set_thread_count(int threads);
int thread_count() noexcept;

}  // namespace labelstack
