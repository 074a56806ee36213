#pragma once

#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace silencer {

template <class Fn>
void for_each_index(std::size_t count, const ParallelOptions& opts, Fn&& fn) {
  if (opts.execution == Execution::Serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
  // Failures are kept per slot so the rethrown one is the lowest index, as in
  // the serial path.
  std::vector<std::exception_ptr> failures(count);
  const auto n = static_cast<std::int64_t>(count);
  const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
#else
  for (std::size_t i = 0; i < count; ++i) fn(i);
#endif
}

}  // namespace silencer
