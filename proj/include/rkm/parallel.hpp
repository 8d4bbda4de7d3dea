#pragma once

#include <cstddef>
#include <functional>

namespace rkm {

/// Number of worker threads used by parallel_for. Defaults to the hardware
/// concurrency; 1 disables threading entirely.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Calls body(i) for every i in [begin, end). Indices are split into
/// contiguous chunks, one per worker. body must only write state owned by
/// index i, which keeps results independent of the thread count. Calls made
/// from inside a worker run serially on that worker.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

} // namespace rkm
