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
// Synthesizes the sanitization channel for a chosen operating point,
// applies it row by row to a database (deterministically per seed), and
// audits the result: empirical distortion per constraint plus the model
// equivocation H(X_h | X̂_r, Z).

#ifndef RDEQ_SANITIZER_HPP_
#define RDEQ_SANITIZER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdeq/model.hpp"
#include "rdeq/parallel.hpp"
#include "rdeq/rde.hpp"

namespace rdeq {

struct SanitizationPlan {
  TradeoffPoint operating_point;
  // Memoryless per-row channel from encoded-attribute tuples to
  // reconstruction tuples.
  Channel channel;
  std::uint64_t seed = 0;
  // True when the solver's channel depended on attributes outside the
  // encoded set and was projected onto it by conditional expectation.
  bool projected = false;
};

// Builds the sanitization channel realizing the R(D,E) operating point:
// the auxiliary channel composed with its decoder, marginalized over the
// side information and conditioned on the encoded attributes.
SanitizationPlan synthesize_channel(const SourceSpec& spec,
                                    std::span<const double> D, double E,
                                    const SolveOptions& options = {});

// Applies the plan independently to each row. Row i's draw comes from the
// (seed, i) substream, so output is reproducible and independent of
// execution order; row order is preserved.
Database sanitize(const Database& db, const SanitizationPlan& plan,
                  const ExecPolicy& policy = {});

struct AuditReport {
  std::vector<double> empirical_distortion;  // Δ_l per constraint
  std::vector<double> target_distortion;     // D_l from the spec
  double equivocation = 0.0;        // model H(X_h | X̂_r, Z), bits
  double target_equivocation = 0.0; // E from the spec
  std::size_t rows = 0;
};

// Per-row empirical distortions of (db, sdb) plus the analytic model
// equivocation of the plan channel (a per-letter quantity; it is not
// estimated from the sampled rows).
AuditReport audit(const Database& db, const Database& sdb,
                  const SourceSpec& spec, const SanitizationPlan& plan,
                  const ExecPolicy& policy = {});

// Plan (de)serialization: channel tensor + seed + operating point.
std::string save_plan(const SanitizationPlan& plan);
SanitizationPlan load_plan(const std::string& text);

}  // namespace rdeq

#endif  // RDEQ_SANITIZER_HPP_
