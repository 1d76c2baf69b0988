#pragma once

#include <cstddef>
#include <functional>

namespace weightlab {

/// Worker count: WEIGHTLAB_THREADS when set (>= 1), otherwise the hardware
/// concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) across thread_count() workers. Each index is
/// processed exactly once; callers write results into per-index slots so
/// the outcome does not depend on scheduling. The exception from the
/// lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace weightlab
