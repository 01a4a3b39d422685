#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace offrl {

/// Calls body(i) for i in [0, count) on up to `jobs` threads. Indices are
/// handed out in order; the first exception is rethrown after all workers stop.
template <class Body>
void parallel_for(std::size_t count, int jobs, Body&& body) {
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < n; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace offrl
