#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hvns {

/// Number of workers used when the caller passes 0.
inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs f(i) for i in [0, jobs) on a bounded pool and returns the results in
/// job order, whatever order they finish in. The first failing job (by index)
/// has its exception rethrown after every worker has stopped.
template <class R, class F>
std::vector<R> parallel_map(std::size_t jobs, F&& f, unsigned workers = 0) {
  std::vector<R> out(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace hvns
