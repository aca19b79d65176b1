#pragma once

#include <cstddef>
#include <functional>

namespace haarlab {

/// Worker count for internal parallel loops: the value of HAARLAB_THREADS
/// when set to a positive integer, otherwise the hardware concurrency.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, count). Each index is visited exactly once;
/// callers write results into per-index slots so reductions stay ordered.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = default_thread_count());

}  // namespace haarlab
