#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace elshear {

/// Runs f(i) for i in [0, n) on a small worker pool. Work items must be
/// independent; results should land in preallocated slots so that output
/// order does not depend on scheduling.
template <class F>
void parallel_for(int n, int jobs, F&& f) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, n);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < n) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace elshear
