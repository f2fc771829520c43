#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mspretest {

// Default worker count: MSPRETEST_WORKERS if set and positive, else the
// hardware concurrency (at least 1).
unsigned default_worker_count();

// Calls body(i) for every i in [0, count) on up to `workers` threads. Work is
// handed out in fixed-size chunks; the first exception thrown by any body is
// rethrown after all threads have stopped.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  constexpr std::size_t kChunk = 64;
  workers = std::max(1u, workers);
  if (workers == 1 || count <= kChunk) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t start = next.fetch_add(kChunk);
      if (start >= count || failed.load()) return;
      const std::size_t stop = std::min(count, start + kChunk);
      try {
        for (std::size_t i = start; i < stop; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned spawned = static_cast<unsigned>(
      std::min<std::size_t>(workers, (count + kChunk - 1) / kChunk));
  pool.reserve(spawned);
  for (unsigned w = 0; w < spawned; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mspretest
