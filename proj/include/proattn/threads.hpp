// Internal parallelism cap. PROTATTN_THREADS=0 (or unset) means use the
// hardware thread count; 1 disables threading; any other value is the cap.
// Work is split by row ranges and every row is reduced sequentially, so
// results are bitwise identical for every thread count.
#pragma once

#include <cstddef>
#include <functional>

namespace proattn {

/// Effective thread cap from PROTATTN_THREADS (>= 1).
std::size_t thread_cap();

/// Runs fn(i) for i in [0, n), partitioned across at most thread_cap()
/// threads. fn must not throw and must write only to disjoint state per i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace proattn
