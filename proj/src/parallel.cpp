#include "heatlocus/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace heatlocus {

int worker_count() {
  if (const char* env = std::getenv("HEATLOCUS_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {
thread_local bool in_worker = false;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  // Nested calls run inline on the calling worker.
  const std::size_t workers =
      in_worker ? 1 : std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto run = [&] {
    const bool was = in_worker;
    in_worker = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
        next.store(count);
      }
    }
    in_worker = was;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (std::thread& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace heatlocus
