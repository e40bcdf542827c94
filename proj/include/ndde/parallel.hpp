#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef NDDE_HAVE_OPENMP
#include <omp.h>
#endif

namespace ndde {

/// Every data-parallel kernel has a serial reference path; both must produce
/// bitwise-identical results because each index writes only its own slot.
enum class Execution { serial, parallel };

/// Apply the NDDE_THREADS cap (if set) to the OpenMP runtime. Returns the
/// number of threads kernels will use.
int configure_threads();

int max_threads();

/// body(i) for i in [0, n). The first exception thrown by any iteration is
/// rethrown on the calling thread after the loop.
template <class Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
    if (exec == Execution::serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
#ifdef NDDE_HAVE_OPENMP
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace ndde
