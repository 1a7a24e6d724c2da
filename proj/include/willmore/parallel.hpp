#pragma once

#include <cstddef>
#include <functional>

namespace willmore {

/// Worker count used by node-parallel loops. 0 selects hardware concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Iterations must be independent; results are
/// identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace willmore
