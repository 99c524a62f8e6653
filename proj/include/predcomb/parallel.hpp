#pragma once

#include <cstddef>
#include <functional>

namespace predcomb {

// Worker count from PREDCOMB_THREADS (unset or 0 = hardware concurrency).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
// processed exactly once; if any call throws, the exception of the lowest
// failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace predcomb
