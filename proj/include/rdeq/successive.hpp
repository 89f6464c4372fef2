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
// Two-stage successive disclosure for single-attribute sources: searches
// for a Markov cascade X -- X̂2 -- X̂1 whose stages each achieve their
// rate-distortion point, certifying that refinement costs no extra rate.

#ifndef RDEQ_SUCCESSIVE_HPP_
#define RDEQ_SUCCESSIVE_HPP_

#include <string>
#include <utility>

#include "rdeq/distortion.hpp"
#include "rdeq/prob.hpp"
#include "rdeq/rd.hpp"

namespace rdeq {

struct StageTarget {
  double distortion = 0.0;    // D_k
  double equivocation = 0.0;  // E_k
};

// A certified (or refuted) two-stage disclosure plan. The cascade is stored
// factored, so the Markov property holds exactly by construction.
struct StagePlan {
  StageTarget coarse;  // (D_1, E_1), the first disclosure
  StageTarget fine;    // (D_2, E_2), the refined view, D_2 < D_1
  Channel fine_channel;    // p(x̂_2 | x): achieves R(D_2)
  Channel refine_channel;  // p(x̂_1 | x̂_2): degrades to the coarse view
  double rate_fine = 0.0;    // I(X; X̂_2)
  double rate_coarse = 0.0;  // I(X; X̂_1) through the cascade
  double coarse_distortion = 0.0;  // achieved E[d(X, X̂_1)]
  double equivocation_coarse = 0.0;  // H(X) - R(D_1)
  double equivocation_fine = 0.0;    // H(X) - R(D_2)
  bool feasible = false;
  std::string note;  // why infeasible, when it is
};

struct SuccessiveOptions {
  RdOptions rd = {};
  // |I(X; X̂_1) - R(D_1)| equality tolerance for the stage condition.
  double rate_match_tolerance = 1e-4;
  std::size_t max_iterations = 20000;
};

// Checks two-stage successive disclosure for a single-axis prior. Throws on
// ordering violations (D_2 >= D_1), per-stage infeasibility (E_k > Γ(D_k))
// and non-scalar priors; reduced-rate mismatches set feasible = false.
StagePlan check_successive(const JointPmf& prior, const DistortionMatrix& d,
                           StageTarget coarse, StageTarget fine,
                           const SuccessiveOptions& options = {});

// (R_0, R_1): the first-stage rate R_1 = I(X;X̂_1) and the refinement
// increment R_0 = I(X;X̂_2) - I(X;X̂_1), recomputed from the stored cascade.
std::pair<double, double> disclosure_rates(const StagePlan& plan,
                                           const JointPmf& prior);

}  // namespace rdeq

#endif  // RDEQ_SUCCESSIVE_HPP_
