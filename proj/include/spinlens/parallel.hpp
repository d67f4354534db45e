#pragma once

#include <cstddef>
#include <functional>

namespace spinlens {

/// Worker count for parallel loops. Defaults to SPINLENS_THREADS when set, else 1.
int thread_count();
void set_thread_count(int threads);

/// Runs body(i) for i in [0, n). Each index is executed exactly once; callers
/// write results into per-index slots so the outcome does not depend on scheduling.
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace spinlens
