#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsg {

/// Execution policy for the node-parallel kernels.  Every parallel kernel
/// has a serial twin that produces bit-identical output; the serial path is
/// the reference used in tests and benchmarks.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

template <class F>
inline void for_each_index_serial(std::size_t count, F&& body) {
    for (std::size_t i = 0; i < count; ++i) body(i);
}

template <class F>
inline void for_each_index_parallel(std::size_t count, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i)
        body(static_cast<std::size_t>(i));
#else
    for_each_index_serial(count, body);
#endif
}

template <class F>
inline void for_each_index(Exec exec, std::size_t count, F&& body) {
    if (exec == Exec::Parallel)
        for_each_index_parallel(count, body);
    else
        for_each_index_serial(count, body);
}

// Deterministic sum: fixed chunking with a serial combine, so the result is
// bit-identical for any thread count.
inline constexpr std::size_t kSumChunk = 4096;

template <class F>
inline double chunked_sum(Exec exec, std::size_t count, F&& term) {
    const std::size_t nchunk = (count + kSumChunk - 1) / kSumChunk;
    std::vector<double> partial(nchunk, 0.0);
    for_each_index(exec, nchunk, [&](std::size_t c) {
        const std::size_t lo = c * kSumChunk;
        const std::size_t hi = lo + kSumChunk < count ? lo + kSumChunk : count;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[c] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

template <class F>
inline double chunked_max(Exec exec, std::size_t count, F&& term) {
    const std::size_t nchunk = (count + kSumChunk - 1) / kSumChunk;
    std::vector<double> partial(nchunk, -1e300);
    for_each_index(exec, nchunk, [&](std::size_t c) {
        const std::size_t lo = c * kSumChunk;
        const std::size_t hi = lo + kSumChunk < count ? lo + kSumChunk : count;
        double m = -1e300;
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = term(i);
            if (v > m) m = v;
        }
        partial[c] = m;
    });
    double total = -1e300;
    for (double m : partial)
        if (m > total) total = m;
    return total;
}

template <class F>
inline double chunked_min(Exec exec, std::size_t count, F&& term) {
    return -chunked_max(exec, count, [&](std::size_t i) { return -term(i); });
}

} // namespace dsg
