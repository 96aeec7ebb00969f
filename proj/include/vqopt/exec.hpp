#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vqopt {

/// Execution policy for the data-parallel kernels. threads == 1 selects the
/// serial reference path; threads > 1 selects the OpenMP path. Both paths
/// must produce bit-identical results: work is split per output element with
/// a static schedule and no floating-point reductions cross element
/// boundaries.
struct Exec {
    int threads = 1;

    static Exec serial() { return Exec{1}; }

    static Exec max_parallel() {
#ifdef _OPENMP
        return Exec{omp_get_max_threads()};
#else
        return Exec{1};
#endif
    }

    bool parallel() const { return threads > 1; }
};

/// Runs fn(i) for i in [0, n). Each index must write only its own outputs.
template <typename Fn>
inline void parallel_for(std::int64_t n, const Exec& ex, Fn&& fn) {
#ifdef _OPENMP
    if (ex.threads > 1) {
#pragma omp parallel for num_threads(ex.threads) schedule(static)
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
#endif
    for (std::int64_t i = 0; i < n; ++i) fn(i);
}

}  // namespace vqopt
