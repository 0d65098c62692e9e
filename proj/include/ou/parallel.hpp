#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ou {

/// Sample count per chunk for chunked Monte Carlo. Fixed so that per-chunk
/// partial sums, and hence results, never depend on the worker count.
inline constexpr std::size_t kChunkSize = 4096;

inline std::atomic<int>& worker_count_storage() {
  static std::atomic<int> workers{1};
  return workers;
}

inline int worker_count() { return worker_count_storage().load(); }
inline void set_worker_count(int workers) { worker_count_storage().store(std::max(1, workers)); }

inline std::size_t chunk_count(std::size_t items, std::size_t chunk = kChunkSize) {
  return (items + chunk - 1) / chunk;
}

/// Runs body(i) for every i in [0, tasks) on up to worker_count() threads.
/// Tasks must write only to their own output slots.
template <typename Body>
void parallel_for(std::size_t tasks, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ou
