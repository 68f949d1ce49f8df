// Copyright 2026 The nerfsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NERFSIM_PARALLEL_HPP
#define NERFSIM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nerfsim {

namespace detail {
inline std::atomic<int>& default_thread_count() {
  static std::atomic<int> count{1};
  return count;
}
}  // namespace detail

/// Worker count used when a call does not specify one. 0 means hardware concurrency.
inline void set_default_threads(int threads) { detail::default_thread_count().store(std::max(0, threads)); }

inline int default_threads() {
  const int n = detail::default_thread_count().load();
  if (n > 0) {
    return n;
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

/// Runs `body(i)` for every i in [0, count).
/**
 * Items are claimed dynamically, so callers must make each item write only
 * its own output slot; results are then independent of the worker count.
 * The exception thrown by the lowest failing index is rethrown.
 */
template <typename Body>
void parallel_for(std::size_t count, Body&& body, int threads = 0) {
  const int workers = static_cast<int>(std::min<std::size_t>(threads > 0 ? threads : default_threads(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        const std::lock_guard lock{error_mutex};
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) {
    pool.emplace_back(run);
  }
  run();
  for (auto& t : pool) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace nerfsim

#endif
