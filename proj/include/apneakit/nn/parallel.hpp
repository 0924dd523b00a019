#pragma once

#include <cstdint>
#include <functional>

namespace apneakit::nn {

// Worker count used by parallel_for. 0 restores the hardware default.
void set_num_threads(int n);
int num_threads();

// Runs fn over contiguous chunks of [begin, end). Chunks never split an
// index, so kernels that compute each output element with a self-contained
// sequential loop produce bitwise-identical results for any worker count.
// Calls from inside a worker run serially (no nesting).
void parallel_for(int64_t begin, int64_t end,
                  const std::function<void(int64_t, int64_t)>& fn);

}  // namespace apneakit::nn
