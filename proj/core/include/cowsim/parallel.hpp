#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace cowsim {

/// Runs fn(i) for i in [0, n) on up to n_workers threads (0 = hardware
/// concurrency). Callers must write results into index-addressed storage;
/// the schedule is work-stealing by atomic counter, so only index-keyed
/// output is deterministic.
inline void parallel_for(std::size_t n, int n_workers,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t workers =
      n_workers <= 0 ? std::thread::hardware_concurrency()
                     : static_cast<std::size_t>(n_workers);
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cowsim
