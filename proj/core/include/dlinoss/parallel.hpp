#pragma once

#include <cstddef>
#include <functional>

namespace dlinoss {

// Worker count for data-parallel sections. Reads DLINOSS_WORKERS once; falls
// back to std::thread::hardware_concurrency(). Always >= 1.
std::size_t worker_count();

// Runs fn(i) for i in [0, n), distributing contiguous chunks over workers.
// Callers are responsible for making results independent of the partition
// (e.g. per-index output slots reduced in a fixed order afterwards).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Runs fn(begin, end) over a contiguous partition of [0, n), one range per
// worker. Lets callers hold one reusable scratch workspace per range.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace dlinoss
