#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace tpp {

// Global cap on worker threads, set from the CLI --threads flag. Work items
// own disjoint output slots, so scheduling never affects results.
inline int& max_threads() {
  static int n = 1;
  return n;
}

inline void set_max_threads(int n) { max_threads() = std::max(1, n); }

template <class Fn>
void parallel_for(int begin, int end, Fn&& fn) {
  const int n = end - begin;
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = std::min({max_threads(), n, hw});
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<int> next{begin};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < end; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace tpp
