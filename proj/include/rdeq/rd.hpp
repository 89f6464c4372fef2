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
// Classical rate-distortion function R(D) and optimal test channel via
// Lagrangian alternating minimization with an outer bisection on the slope.

#ifndef RDEQ_RD_HPP_
#define RDEQ_RD_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdeq/distortion.hpp"
#include "rdeq/parallel.hpp"
#include "rdeq/prob.hpp"

namespace rdeq {

struct RdOptions {
  // |achieved distortion - D| goal for the outer slope bisection.
  double distortion_tolerance = 1e-6;
  // Inner alternating-minimization stop: objective change below this.
  double objective_tolerance = 1e-10;
  std::size_t max_inner_iterations = 100000;
  // Labels for the reconstruction axis; synthesized digits when absent.
  std::optional<Alphabet> output_alphabet;
};

// One point on the R(D) curve together with its achieving test channel.
struct RDPoint {
  double target = 0.0;      // requested D
  double distortion = 0.0;  // achieved E[d], always <= target
  double rate = 0.0;        // I(X; X̂) of the channel, in bits
  double slope = 0.0;       // Lagrange multiplier s <= 0 (-inf at D_min)
  Channel channel;          // p(x̂|x) over the prior's axes
};

// (D_min, D_max): D_min = E[min_x̂ d(X, x̂)]; D_max is the distortion of the
// best constant reconstruction, beyond which R = 0.
std::pair<double, double> distortion_bounds(const JointPmf& prior,
                                            const DistortionMatrix& d);

// R(D) for D >= D_min; throws InfeasibleDistortionError below D_min.
RDPoint rate_distortion(const JointPmf& prior, const DistortionMatrix& d,
                        double D, const RdOptions& options = {});

struct RdCurveEntry {
  double target = 0.0;
  std::optional<RDPoint> point;  // empty on a per-point error
  std::string error;
};

// One entry per grid value; infeasible values produce error entries and the
// sweep continues. Grid points are solved independently (in parallel under
// the policy).
std::vector<RdCurveEntry> rd_curve(const JointPmf& prior,
                                   const DistortionMatrix& d,
                                   std::span<const double> grid,
                                   const RdOptions& options = {},
                                   const ExecPolicy& policy = {});

namespace detail {

// Solver core over raw arrays; rows with zero prior mass are excluded from
// the iteration and given a deterministic point-mass row in the result.
struct BaResult {
  std::vector<double> channel;  // n x m, row-major
  double rate = 0.0;
  double distortion = 0.0;
  double slope = 0.0;
};

BaResult ba_rate_distortion(std::span<const double> px,
                            const DistortionMatrix& d, double D,
                            const RdOptions& options);

std::pair<double, double> raw_distortion_bounds(std::span<const double> px,
                                                const DistortionMatrix& d);

}  // namespace detail

}  // namespace rdeq

#endif  // RDEQ_RD_HPP_
