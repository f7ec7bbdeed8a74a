#pragma once

#include <cstddef>
#include <functional>

namespace geosep {

// Runs fn(0..n-1) on up to `threads` workers. Each task must write only its
// own outputs; callers combine results in index order, so the outcome does
// not depend on the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace geosep
