#pragma once

#include <cstddef>
#include <functional>

namespace fedattr {

// Worker count: FEDATTR_THREADS when set to a positive integer, otherwise the
// machine's hardware concurrency (at least 1).
std::size_t default_thread_count();

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
// executed exactly once; callers write results into per-index slots so the
// outcome never depends on scheduling. The first exception thrown by any
// body is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace fedattr
