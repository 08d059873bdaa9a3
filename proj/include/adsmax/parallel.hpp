#pragma once

#include <cstddef>
#include <functional>

namespace adsmax {

// worker count: ADSMAX_THREADS if set, else hardware concurrency
int thread_count();

// Calls body(begin, end) on contiguous chunks of [0, n). Chunk boundaries
// depend only on n and the thread count; callers write per-index results and
// reduce serially, so output never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace adsmax
