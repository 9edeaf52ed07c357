#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cscn {

// Worker count: CSCN_THREADS overrides hardware concurrency.
inline int default_threads() {
  if (const char* env = std::getenv("CSCN_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : int(hc);
}

// Runs fn(i) for i in [0, n). Results must be written to per-index slots;
// the schedule is then irrelevant to the output.
inline void parallel_for(int n, const std::function<void(int)>& fn,
                         int threads = default_threads()) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const int nw = std::min(threads, n);
  pool.reserve(size_t(nw - 1));
  for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace cscn
