#pragma once

#include <cstddef>
#include <functional>

namespace calib {

// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `threads`
// workers. Each index is visited exactly once; callers write results into
// per-index slots so output is independent of the thread count.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace calib
