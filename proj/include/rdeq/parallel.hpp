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
//
// Execution policy shared by every data-parallel kernel in the library.
// Each kernel keeps a plain serial loop as the reference path and an
// OpenMP path selected at runtime; results must be identical bit for bit
// regardless of the policy or thread count (all reductions are performed
// in a fixed order).

#ifndef RDEQ_PARALLEL_HPP_
#define RDEQ_PARALLEL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rdeq {

struct ExecPolicy {
  // false => the serial reference implementation.
  bool parallel = true;
  // 0 => the OpenMP runtime default.
  int threads = 0;

  static ExecPolicy serial_reference() { return ExecPolicy{false, 1}; }
  static ExecPolicy openmp(int threads = 0) { return ExecPolicy{true, threads}; }

  // Number of worker threads this policy resolves to (1 when serial or
  // when the library was built without OpenMP).
  int resolved_threads() const;
};

// Runs body(i) for i in [0, n). Iterations must be independent.
void parallel_for(const ExecPolicy& policy, std::size_t n,
                  const std::function<void(std::size_t)>& body);

// Sum of term(i) for i in [0, n) with a fixed reduction order: fixed-size
// chunks are accumulated serially and chunk partials are combined in index
// order, so the result does not depend on the policy or thread count.
double deterministic_sum(const ExecPolicy& policy, std::size_t n,
                         const std::function<double(std::size_t)>& term);

// True when the library was compiled with OpenMP support.
bool openmp_enabled();

// Short description of the runtime ("openmp, N threads" or "serial").
std::string runtime_description(const ExecPolicy& policy);

}  // namespace rdeq

#endif  // RDEQ_PARALLEL_HPP_
