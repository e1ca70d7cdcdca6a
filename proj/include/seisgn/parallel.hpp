#pragma once

#include <cstddef>
#include <functional>

namespace seisgn {

/// Worker cap from SEISGN_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

/// Runs body(k) for k in [0, n) on up to worker_count() threads. Each index is
/// visited once; the first exception thrown is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace seisgn
