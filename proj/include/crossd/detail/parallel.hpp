#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace crossd {

// Global worker budget for the data-parallel operator loops. 1 means serial.
// Results are schedule-independent: jobs write disjoint output ranges.
void set_thread_budget(unsigned n);
unsigned thread_budget();

namespace detail {

template <class F>
void parallel_for(std::size_t n, F&& fn) {
  std::size_t workers = thread_budget();
  if (workers > n) workers = n;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail
}  // namespace crossd
