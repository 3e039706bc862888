#pragma once

#include <cstddef>
#include <functional>

namespace cmdp {

/// Worker count: CMDP_DUAL_THREADS when set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. The first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cmdp
