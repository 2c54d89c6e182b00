#pragma once

// Batch evaluation kernels. Every parallel entry point has a serial
// reference twin with identical results: work items carry their own seeds,
// so the schedule never influences what an item computes.

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace negoforge {

template <typename Result, typename Fn>
std::vector<Result> serial_map(std::size_t n, Fn&& fn) {
  std::vector<Result> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
  return out;
}

// Evaluates fn(i) for i in [0, n) on `workers` OpenMP threads. The first
// exception thrown by any item is rethrown after the region completes.
template <typename Result, typename Fn>
std::vector<Result> parallel_map(std::size_t n, Fn&& fn, int workers) {
  if (workers <= 1 || n < 2) return serial_map<Result>(n, fn);
  std::vector<Result> out(n);
  std::exception_ptr failure;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(negoforge_parallel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

inline int available_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace negoforge
