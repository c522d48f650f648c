#ifndef CBO_PARALLEL_HPP
#define CBO_PARALLEL_HPP

#include <thread>
#include <vector>

namespace cbo {

// Process-wide worker count for parallel_for. 0 = hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Static contiguous partition of [0, n). Bodies must be independent and write
// disjoint locations; given that, results do not depend on the worker count.
template <typename Fn>
void parallel_for(long n, Fn&& fn) {
  const int workers = thread_count();
  if (workers <= 1 || n < 256) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const long chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const long lo = w * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cbo

#endif
