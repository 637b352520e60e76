#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace lagwall {

// Optional fork-join parallelism over element/face ranges, controlled by
// HYDRO_THREADS (default 1). Work is split into fixed contiguous ranges and
// per-range results are merged in range order by the caller, so histories
// are identical for any thread count.
inline int thread_count() {
  static int n = [] {
    const char* s = std::getenv("HYDRO_THREADS");
    if (!s) return 1;
    int v = std::atoi(s);
    return std::clamp(v, 1, 64);
  }();
  return n;
}

// fn(begin, end, slot) with slot in [0, n_slots); returns n_slots used.
template <class F>
inline int parallel_ranges(int n_items, F&& fn) {
  int nt = std::min(thread_count(), std::max(n_items, 1));
  if (nt <= 1) {
    fn(0, n_items, 0);
    return 1;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  int chunk = (n_items + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    int b = t * chunk, e = std::min(n_items, b + chunk);
    pool.emplace_back([&fn, b, e, t] { fn(b, std::max(b, e), t); });
  }
  for (auto& th : pool) th.join();
  return nt;
}

}  // namespace lagwall
