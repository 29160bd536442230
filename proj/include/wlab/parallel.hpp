#pragma once

// Deterministic work splitting. Tasks write into caller-owned slots indexed
// by task id; reductions happen afterwards in index order, so any worker
// count produces identical bytes.

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace wlab {

// body(i) is called exactly once for each i in [0, n), partitioned into
// contiguous static chunks. body must only touch state owned by task i.
template <class F>
void parallel_for(std::int64_t n, unsigned workers, F&& body) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  unsigned w = workers;
  if (std::int64_t(w) > n) w = unsigned(n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(w);
  pool.reserve(w);
  for (unsigned t = 0; t < w; ++t) {
    std::int64_t lo = n * t / w, hi = n * (t + 1) / w;
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace wlab
