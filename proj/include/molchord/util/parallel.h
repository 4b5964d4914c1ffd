//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_UTIL_PARALLEL_H_
#define MOLCHORD_UTIL_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace molchord {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items are
// independent; callers write results into slot i so the merged output does
// not depend on scheduling. The first exception is rethrown after all
// workers join.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn &&fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }

  std::atomic<std::size_t> next { 0 };
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error)
          first_error = std::current_exception();
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(std::min(workers, n));
  for (std::size_t w = 0; w < std::min(workers, n); ++w)
    pool.emplace_back(body);
  pool.clear();

  if (first_error)
    std::rethrow_exception(first_error);
}

}  // namespace molchord

#endif  // MOLCHORD_UTIL_PARALLEL_H_
