#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace agendascope {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is handed out in
// contiguous blocks; fn must only write to per-index state. The first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// Splits [0, n) into `parts` contiguous half-open ranges of near-equal size.
// The split depends only on n and parts, never on the thread count, so
// per-range partial sums combined in range order are reproducible.
std::vector<std::pair<std::size_t, std::size_t>> fixed_partitions(std::size_t n, std::size_t parts);

}  // namespace agendascope
