#pragma once

#include "penreg/types.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace penreg {

struct Parallelism {
  bool enabled = false;
  std::optional<unsigned> num_cores;

  /// Worker count: 1 when disabled, otherwise num_cores or (hardware - 1).
  unsigned workers() const {
    if (!enabled) return 1;
    if (num_cores) return std::max(1u, *num_cores);
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 1 ? hw - 1 : 1;
  }
};

/// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks are
/// claimed from a shared counter; each writes only its own output slot, so
/// results never depend on scheduling. The first exception is rethrown.
template <typename Task>
void parallel_for(Index count, unsigned workers, Task&& task) {
  if (count <= 0) return;
  const auto threads = static_cast<Index>(std::min<Index>(workers, count));
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (Index t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace penreg
