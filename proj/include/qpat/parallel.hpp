#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace qpat {

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each,
/// one chunk per worker. Values computed per index must not depend on the
/// partition; callers own any per-thread state.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int workers = std::max(1, threads);
  if (workers == 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, static_cast<std::size_t>(w) * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace qpat
