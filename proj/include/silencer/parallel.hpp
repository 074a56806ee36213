#pragma once

#include <cstddef>
#include <cstdint>

namespace silencer {

/// How a data-parallel kernel runs. Serial is the reference path; both must
/// produce bit-identical results because every work item owns its output slot
/// and reductions happen afterwards in index order.
enum class Execution { Serial, Parallel };

struct ParallelOptions {
  Execution execution = Execution::Parallel;
  int threads = 0;  // 0: OpenMP default
};

/// Calls fn(i) for i in [0, count). With Parallel, iterations are spread over
/// OpenMP threads with dynamic scheduling. If iterations throw, the exception
/// from the lowest failing index is rethrown on the calling thread.
template <class Fn>
void for_each_index(std::size_t count, const ParallelOptions& opts, Fn&& fn);

int available_threads() noexcept;

}  // namespace silencer

#include "silencer/parallel_impl.hpp"
