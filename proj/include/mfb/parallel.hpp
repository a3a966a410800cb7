#pragma once

#include <cstddef>
#include <functional>

namespace mfb {

/// Worker count used by parallel_for: set_worker_count() if called with a
/// non-zero value, else MFB_THREADS, else the hardware concurrency.
std::size_t worker_count();
void set_worker_count(std::size_t workers);

/// Splits [0, n) into contiguous chunks, one per worker, and runs body(begin, end)
/// on each. Results must not depend on the split; an exception thrown by any chunk
/// is rethrown from the lowest-indexed failing chunk.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mfb
