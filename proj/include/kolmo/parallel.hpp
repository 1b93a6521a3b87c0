#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kolmo {

// Process-wide worker count used by the analysis routines (default 1).
int thread_count();
void set_thread_count(int threads);

// Runs fn(i) for i in [0, count) on up to thread_count() threads. Work is
// split into contiguous ranges; callers that reduce must do so in index order
// afterwards so results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const auto workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, thread_count())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      pool.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kolmo
