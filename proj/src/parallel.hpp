#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace quadtomo::detail {

/// Run body(begin, end) over a partition of [0, n) on `threads` workers.
/// Ranges are contiguous and fixed by (n, threads) alone; workers write to
/// disjoint output regions, so results do not depend on scheduling.
template <typename Body>
void parallel_ranges(std::size_t n, unsigned threads, const Body& body) {
  if (threads <= 1 || n < 2) {
    body(std::size_t{0}, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace quadtomo::detail
