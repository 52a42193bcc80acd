#pragma once

#include <cstddef>
#include <functional>

namespace sticky {

// Worker cap: STICKY_WALK_THREADS if set to a positive integer, otherwise
// the hardware concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
// processed exactly once; callers write into preallocated slots so results
// are independent of scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t workers = worker_count());

}  // namespace sticky
