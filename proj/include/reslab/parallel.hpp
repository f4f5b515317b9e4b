#pragma once

#include <cstddef>
#include <functional>

namespace reslab {

// requested > 0 wins; otherwise RESLAB_THREADS, otherwise the hardware count.
int resolve_threads(int requested = 0);

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
// processed exactly once; callers write results into slot i, so the outcome
// does not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace reslab
