#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace emscale {

// Global worker bound for the OpenMP kernels. 0 = runtime default.
// Every parallel loop in this library iterates over independent cells whose
// randomness is derived per cell, so the thread bound never changes results.
inline int& thread_bound_slot() {
    static int bound = 0;
    return bound;
}

inline void set_max_threads(int n) { thread_bound_slot() = n; }
inline int max_threads() { return thread_bound_slot(); }

template <typename F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
    const int bound = max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(bound > 0 ? bound : omp_get_max_threads())
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        body(static_cast<std::size_t>(i));
    }
#else
    for (std::size_t i = 0; i < n; ++i) body(i);
#endif
}

}  // namespace emscale
