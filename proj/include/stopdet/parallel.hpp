#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace stopdet {

inline std::size_t hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<std::size_t>(n);
}

// Runs fn(begin, end) over contiguous chunks of [begin, end) on `threads`
// threads. Each index is handled by exactly one thread, so results do not
// depend on the thread count.
template <typename Fn>
void parallel_rows(std::size_t begin, std::size_t end, std::size_t threads, Fn&& fn) {
  const std::size_t count = end > begin ? end - begin : 0;
  if (count == 0) return;
  if (threads <= 1 || count < 2 * threads) {
    fn(begin, end);
    return;
  }
  const std::size_t chunk = (count + threads - 1) / threads;
  std::vector<std::thread> workers;
  workers.reserve(threads - 1);
  std::size_t lo = begin + chunk;
  for (std::size_t t = 1; t < threads && lo < end; ++t, lo += chunk) {
    const std::size_t hi = std::min(lo + chunk, end);
    workers.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  fn(begin, std::min(begin + chunk, end));
  for (auto& w : workers) w.join();
}

}  // namespace stopdet
