#pragma once

#include <cstddef>
#include <functional>

namespace trajsynth {

// Worker count from TRAJSYNTH_THREADS, else the hardware concurrency (at least 1).
unsigned worker_count();

// Runs body(i) for i in [0, n). Iterations may run concurrently; body must
// only touch its own output slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace trajsynth
