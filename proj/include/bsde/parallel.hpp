#pragma once

#include <cstddef>
#include <functional>

namespace bsde {

/// Number of worker threads used by the library. Defaults to the hardware
/// concurrency. Results never depend on this value.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Splits [0, n) into contiguous chunks and runs `body(begin, end)` on each.
/// Chunk boundaries depend only on `n` and the thread count; bodies must not
/// write to shared state outside their own index range.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace bsde
