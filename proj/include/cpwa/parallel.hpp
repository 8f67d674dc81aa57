#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace cpwa {

/// Worker count: CPWA_WORKERS env var, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("CPWA_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static block partition over [0, n); each index must write only its own
/// slots, which keeps results schedule-independent.
template <typename Fn>
void parallel_for(long n, Fn&& fn) {
  const int workers = worker_count();
  if (workers <= 1 || n < 2) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  const long chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long lo = w * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace cpwa
