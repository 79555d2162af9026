#pragma once

#include <cstddef>
#include <functional>

namespace mkedge {

/// Worker count: hardware concurrency, capped by EDGEWORTH_THREADS when set.
unsigned thread_budget();

/// Splits [0, count) into contiguous chunks of at least `grain` items and
/// runs body(begin, end) on up to thread_budget() threads. Chunks write to
/// disjoint outputs, so results do not depend on the thread count.
void parallel_for(std::size_t count, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mkedge
