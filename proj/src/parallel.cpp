#include "kolmo/parallel.hpp"

#include <atomic>

#include "kolmo/error.hpp"

namespace kolmo {
namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(std::memory_order_relaxed); }

void set_thread_count(int threads) {
  if (threads < 1) throw InvalidArgument("thread count must be at least 1");
  g_threads.store(threads, std::memory_order_relaxed);
}

}  // namespace kolmo
