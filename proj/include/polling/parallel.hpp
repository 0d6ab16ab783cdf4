#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace polling {

/// Worker count for the parallel kernels: POLLING_THREADS when set, else the OpenMP default.
int thread_count();

/// Overrides thread_count() for the rest of the process; 0 restores the default.
void set_thread_count(int n);

/// Runs f(i) for i in [0, n) with a dynamic schedule. Callers must write
/// only to slot i of preallocated output so the result is order independent.
/// The exception from the lowest failing index is rethrown after the loop.
template <class F>
void parallel_for(std::size_t n, F&& f) {
#if defined(_OPENMP)
    const int threads = thread_count();
    if (threads > 1 && n > 1 && !omp_in_parallel()) {
        const auto count = static_cast<long long>(n);
        std::exception_ptr error;
        std::size_t error_index = n;
        std::mutex guard;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (long long i = 0; i < count; ++i) {
            try {
                f(static_cast<std::size_t>(i));
            } catch (...) {
                std::lock_guard lock(guard);
                if (static_cast<std::size_t>(i) < error_index) {
                    error_index = static_cast<std::size_t>(i);
                    error = std::current_exception();
                }
            }
        }
        if (error) std::rethrow_exception(error);
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) f(i);
}

}  // namespace polling
