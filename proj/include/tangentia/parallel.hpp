#pragma once

#include <cstddef>
#include <functional>

namespace tangentia {

/// Worker count: TANGENTIA_THREADS if set (>= 1), else hardware concurrency.
unsigned thread_budget();

/// Calls body(i) for i in [0, n). Each index is handled exactly once; callers
/// write results into per-index slots so output order never depends on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tangentia
