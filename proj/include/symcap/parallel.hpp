#pragma once
#include <cstddef>
#include <functional>

namespace symcap {

/// Caps the number of worker threads used by parallel_for (0 = hardware default).
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs f(i) for i in [0, n). Work is split into contiguous blocks; callers write
/// results by index so the outcome never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace symcap
