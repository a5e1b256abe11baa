#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace oplab {

// Worker cap from OPINION_LAB_THREADS (>=1). Affects speed only: all parallel
// loops below write disjoint slots and keep per-item arithmetic sequential,
// so results are identical for every worker count.
inline int worker_count() {
  if (const char* env = std::getenv("OPINION_LAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(std::min<long>(v, 64));
    return 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

// Runs fn(begin, end) over contiguous index chunks, one per worker.
template <typename Fn>
void parallel_chunks(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 128) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t w = std::min<std::size_t>(workers, n);
  const std::size_t chunk = (n + w - 1) / w;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t lo = k * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace oplab
