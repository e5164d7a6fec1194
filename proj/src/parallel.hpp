// Copyright 2026 The qwsample Authors
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

#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qws::detail {

// Splits [begin, end) into one contiguous block per worker and calls
// body(lo, hi, worker). Results never depend on the worker count as long as
// body only touches its own index range.
template <class Body>
void parallel_for(std::uint64_t begin, std::uint64_t end, int threads, Body&& body) {
  const std::uint64_t count = end > begin ? end - begin : 0;
  const int workers = static_cast<int>(std::clamp<std::uint64_t>(
      std::min<std::uint64_t>(threads < 1 ? 1 : threads, count), 1, 1024));
  if (workers == 1) {
    body(begin, end, 0);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const std::uint64_t lo = begin + count * w / workers;
    const std::uint64_t hi = begin + count * (w + 1) / workers;
    pool.emplace_back([&, lo, hi, w] {
      try {
        body(lo, hi, w);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qws::detail
