#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace strm {

// Deterministic replicate fan-out: evaluates fn(i) for i in [0, n) on up to
// `threads` workers and returns the results indexed by i.  Each result is
// written into its own pre-allocated slot, so the output is independent of
// the scheduling order; combined with replicate-keyed substreams this makes
// whole experiments bit-identical across thread counts.  The first exception
// thrown by any worker is rethrown on the calling thread after all workers
// have stopped.
template <typename Fn>
auto parallel_map(uint64_t n, int threads, Fn&& fn)
    -> std::vector<decltype(fn(uint64_t{0}))> {
  using Result = decltype(fn(uint64_t{0}));
  std::vector<Result> results(n);
  if (n == 0) return results;
  int workers = threads;
  if (workers < 1) workers = 1;
  if (static_cast<uint64_t>(workers) > n) workers = static_cast<int>(n);

  if (workers == 1) {
    for (uint64_t i = 0; i < n; ++i) results[i] = fn(i);
    return results;
  }

  std::atomic<uint64_t> next_index{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&]() {
    for (;;) {
      const uint64_t i = next_index.fetch_add(1, std::memory_order_relaxed);
      if (i >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        results[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers) - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace strm
