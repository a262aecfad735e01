#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace floqstab {

inline int default_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs work(i) for i in [0, n) on a bounded pool. Items are claimed in index order;
// the first exception thrown by work() is rethrown after all workers stop.
inline void parallel_for(int n, int threads, const std::function<void(int)>& work) {
  if (n <= 0) return;
  const int workers = std::clamp(threads > 0 ? threads : default_threads(), 1, n);
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex m;
  auto run = [&] {
    for (int i; !stop && (i = next++) < n;) {
      try {
        work(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace floqstab
