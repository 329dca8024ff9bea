#pragma once

#include <cstdint>
#include <functional>

namespace qdeloc {

/// Worker count: QDELOC_THREADS if set and positive, else std::thread::hardware_concurrency (at least 1).
int worker_count(int requested = 0);

/// Call fn(i) for i in [0, n) from `threads` workers pulling indices off a shared counter.
/// The first exception thrown by any worker is rethrown after all workers stop.
void parallel_for(std::uint64_t n, int threads, const std::function<void(std::uint64_t)> &fn);

} // namespace qdeloc
