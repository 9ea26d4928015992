#include "qgbec/parallel.hpp"

namespace qgbec {

namespace {
std::atomic<std::size_t> g_worker_limit{0};
}

void set_worker_limit(std::size_t workers) noexcept { g_worker_limit.store(workers); }

std::size_t worker_limit() noexcept {
  const std::size_t limit = g_worker_limit.load();
  if (limit != 0) return limit;
  const std::size_t hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace qgbec
