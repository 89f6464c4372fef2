// Copyright 2026 The rdeq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rdeq/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdeq {

namespace {
constexpr std::size_t kSumChunk = 4096;
}

int ExecPolicy::resolved_threads() const {
#ifdef _OPENMP
  if (!parallel) return 1;
  if (threads > 0) return threads;
  return omp_get_max_threads();
#else
  return 1;
#endif
}

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

std::string runtime_description(const ExecPolicy& policy) {
  if (!openmp_enabled() || !policy.parallel) return "serial";
  return "openmp, " + std::to_string(policy.resolved_threads()) + " threads";
}

void parallel_for(const ExecPolicy& policy, std::size_t n,
                  const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
  if (policy.parallel && n > 1) {
    const int threads = policy.resolved_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      body(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

double deterministic_sum(const ExecPolicy& policy, std::size_t n,
                         const std::function<double(std::size_t)>& term) {
  const std::size_t chunks = (n + kSumChunk - 1) / kSumChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(policy, chunks, [&](std::size_t c) {
    const std::size_t lo = c * kSumChunk;
    const std::size_t hi = lo + kSumChunk < n ? lo + kSumChunk : n;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[c] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace rdeq
