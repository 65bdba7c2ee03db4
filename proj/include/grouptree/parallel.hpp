#pragma once

#include <cstddef>
#include <functional>

namespace grouptree {

/// Degree from the GROUPTREE_PARALLELISM environment variable, else the
/// hardware concurrency, else 1.
unsigned default_parallelism();

/// Runs body(0..count-1) across at most `degree` worker threads. Each index
/// is handed out exactly once; callers write results into per-index slots so
/// the outcome is independent of scheduling. The first exception thrown by
/// any worker is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned degree,
                  const std::function<void(std::size_t)>& body);

}  // namespace grouptree
