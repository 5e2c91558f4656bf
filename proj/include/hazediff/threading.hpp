// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hazediff {

/// Worker cap: HAZEDIFF_THREADS if set (>=1), otherwise hardware concurrency.
inline int thread_budget() {
  if (const char* env = std::getenv("HAZEDIFF_THREADS")) {
    int n = std::atoi(env);
    return n >= 1 ? n : 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? static_cast<int>(hw) : 1;
}

/// Runs f(i) for i in [0, n) partitioned into contiguous chunks. Each index
/// must be independent so the result is identical to the sequential order.
template <typename F>
void parallel_for(int n, F&& f, int min_per_thread = 16) {
  int workers = std::min(thread_budget(), std::max(1, n / min_per_thread));
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int lo = w * chunk;
    int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&f, lo, hi] {
      for (int i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace hazediff
