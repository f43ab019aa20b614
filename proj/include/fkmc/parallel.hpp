#pragma once

#include <cstdint>
#include <functional>

namespace fkmc {

// Runs fn(lo, hi) over n_workers disjoint contiguous ranges covering
// [0, n).  The partition depends only on (n, n_workers); workers write to
// disjoint preallocated slots, and reductions happen afterwards in index
// order, so estimates are independent of the worker count.  The first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_ranges(int64_t n, int n_workers,
                     const std::function<void(int64_t, int64_t)>& fn);

}  // namespace fkmc
