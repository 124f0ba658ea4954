#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace msgeo {

// Runs f(i) for i in [0, n) across hardware threads. Each index writes its
// own slot, so results do not depend on scheduling; reductions stay with the
// caller in index order. The first worker exception is rethrown here.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (n < 2 || hw < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(hw, n));
  pool.reserve(nthreads - 1);
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace msgeo
