#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace skewflow {

// Worker count: SKEWFLOW_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
inline unsigned thread_count() {
  if (const char* env = std::getenv("SKEWFLOW_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [begin, end) over contiguous chunks. Each index is
// visited exactly once; callers write to disjoint slots so results do not
// depend on the schedule.
template <class Body>
void parallel_for(long begin, long end, Body&& body) {
  const long n = end - begin;
  if (n <= 0) return;
  const long workers = std::min<long>(thread_count(), n);
  if (workers <= 1 || n < 64) {
    for (long i = begin; i < end; ++i) body(i);
    return;
  }
  const long chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (long w = 0; w < workers; ++w) {
    const long lo = begin + w * chunk;
    const long hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (long i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace skewflow
