#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace hmcf {

// Runs fn(begin, end) over a static partition of [0, n) into contiguous
// blocks, one per worker. Work items must write to disjoint locations;
// any reduction has to be done per block and combined afterwards in block
// order so that results do not depend on the worker count.
template <typename Fn>
void parallel_for_blocks(std::size_t n, int threads, Fn&& fn) {
  if (threads < 1) threads = 1;
  const std::size_t t = static_cast<std::size_t>(threads);
  if (t <= 1 || n < 2 * t) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    const std::size_t b = n * w / t;
    const std::size_t e = n * (w + 1) / t;
    if (b == e) continue;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace hmcf
