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
// SplitMix64-based pseudorandomness. Substreams are keyed by (seed, id),
// so per-row or per-restart draws are independent of execution order.

#ifndef RDEQ_RNG_HPP_
#define RDEQ_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <span>

namespace rdeq {

// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

// Independent substream for (seed, stream id): used for per-row sanitizer
// draws and per-restart solver initializations.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t id) {
  return SplitMix64(mix64(seed ^ mix64(id ^ 0x517cc1b727220a95ULL)));
}

// Dirichlet(1,...,1) sample: normalized unit-rate exponentials.
inline void dirichlet_row(SplitMix64& rng, std::span<double> out) {
  double total = 0.0;
  for (double& v : out) {
    v = -std::log(1.0 - rng.next_unit());
    total += v;
  }
  for (double& v : out) v /= total;
}

}  // namespace rdeq

#endif  // RDEQ_RNG_HPP_
