#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qgbec {

/// Caps the number of worker threads used by the parallel kernels. Zero
/// restores the default (hardware concurrency). Results never depend on it.
void set_worker_limit(std::size_t workers) noexcept;
std::size_t worker_limit() noexcept;

/// Calls body(i) for every i in [0, count). Each index is handled exactly once
/// by some worker; callers write into per-index slots and reduce afterwards
/// in index order, which keeps results independent of the worker count.
/// The first exception thrown by any body is rethrown on the calling thread.
template <class Body>
void parallel_for_index(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(worker_limit(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto drain = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(drain);
    drain();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qgbec
