#pragma once

#include <cstddef>
#include <functional>

namespace magspec {

/// Worker count used by parallel loops; defaults to MAGSPEC_THREADS or 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over [0, n) split into contiguous chunks.
/// Falls back to a single inline call for small ranges or one worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 4096);

}  // namespace magspec
