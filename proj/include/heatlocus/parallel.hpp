#pragma once

#include <cstddef>
#include <functional>

namespace heatlocus {

/// Worker count: HEATLOCUS_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Indices are
/// claimed dynamically; the first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace heatlocus
