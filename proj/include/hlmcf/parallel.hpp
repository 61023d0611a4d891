#pragma once

#include <cstddef>
#include <functional>

namespace hlmcf {

// Worker count from HLMCF_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

// Runs body(begin, end) over disjoint chunks of [0, n). Bodies must only write
// to their own index range; no reductions happen here, so results do not
// depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace hlmcf
