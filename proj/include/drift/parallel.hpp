/*
 * Copyright 2026 The driftbench authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <exception>

namespace drift {

// Worker count honored by parallel_for. 0 or 1 means serial.
int max_threads();
void set_max_threads(int n);

// Runs body(i) for i in [0, n). Iterations must be independent and
// write disjoint slots; outputs must not depend on execution order, so
// results match serial_for for any thread count. The first exception
// thrown by any iteration is rethrown on the calling thread.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
  std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(drift_parallel_for_error)
      {
        if (!error) error = std::current_exception();
      }
    }
  }
#else
  for (std::size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      if (!error) error = std::current_exception();
    }
  }
#endif
  if (error) std::rethrow_exception(error);
}

// Plain loop with the same contract; the reference twin of parallel_for.
template <typename F>
void serial_for(std::size_t n, F&& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace drift
