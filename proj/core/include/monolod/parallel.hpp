#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace monolod {

inline int default_worker_count() {
  if (const char* env = std::getenv("MONOLOD_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Static-partition parallel loop over [0, count). Each index is visited
/// exactly once and writes only its own output slot, so the schedule cannot
/// change results. The first worker exception is rethrown on the caller.
template <typename Fn>
void parallel_for(int count, Fn&& fn, int workers = 0) {
  if (workers <= 0) workers = default_worker_count();
  workers = std::min(workers, std::max(count, 1));
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<long long>(count) * w / workers);
    const int end = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
    pool.emplace_back([&, begin, end] {
      try {
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace monolod
