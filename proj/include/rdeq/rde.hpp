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
// The distortion-equivocation solvers: Γ(D) (maximum equivocation under
// distortion bounds), R(D,E) (minimum rate under distortion and
// equivocation bounds), the (R,D,E) region sweep, a quantized brute-force
// oracle, and the special-case dispatcher.

#ifndef RDEQ_RDE_HPP_
#define RDEQ_RDE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdeq/distortion.hpp"
#include "rdeq/model.hpp"
#include "rdeq/parallel.hpp"
#include "rdeq/prob.hpp"
#include "rdeq/rd.hpp"

namespace rdeq {

// Structural classification of a model, selecting the solver path.
enum class ModelCase {
  kCensusK1,        // no side info, every attribute public and private, L = 1
  kNoSideInfo,      // Z constant: the description itself is the user's view
  kWynerZivMarkov,  // side info with X_h -- X_r -- Z: encode X_r only
  kGeneral,
};

const char* to_string(ModelCase c);

ModelCase dispatch_special_case(const SourceSpec& spec);

struct SolveOptions {
  int restarts = 16;  // seeded random initializations per solve
  std::uint64_t seed = 1;
  int max_outer = 40;   // augmented-Lagrangian multiplier rounds
  int max_inner = 800;  // exponentiated-gradient steps per round
  std::optional<std::size_t> aux_cardinality;  // override for |U|
  bool force_general = false;  // bypass special-case dispatch (testing)
  ExecPolicy exec = {};
  RdOptions rd = {};
};

struct SolveStats {
  ModelCase dispatched = ModelCase::kGeneral;
  std::size_t aux_cardinality = 0;
  // |U| was extended additively because the model has L > 1 constraints.
  bool caratheodory_extended = false;
  int restarts_used = 0;
  std::int64_t inner_iterations = 0;
  double max_distortion_slack = 0.0;   // max_l (Δ_l - D_l), <= 0 when strict
  double equivocation_slack = 0.0;     // E - H when an E bound was active
};

// The optimizing auxiliary channel together with its deterministic decoder
// and the quantities it achieves. All reported values are recomputable from
// the stored channel and decoder.
struct AuxChannelSolution {
  Alphabet aux_alphabet;
  Channel channel;                    // p(u | attributes)
  std::vector<std::size_t> decoder;   // [u * nz + z] -> reconstruction cell
  std::vector<Alphabet> reconstruction;
  double rate = 0.0;           // I(X_h X_r; U) - I(Z; U), bits
  double equivocation = 0.0;   // H(X_h | U, Z), bits
  std::vector<double> distortion;  // achieved, one per constraint
  SolveStats stats;
};

// Recomputes rate/equivocation/distortion of a solution from its stored
// channel and decoder against the spec's joint distribution.
struct Reevaluation {
  double rate = 0.0;
  double equivocation = 0.0;
  std::vector<double> distortion;
};
Reevaluation reevaluate(const SourceSpec& spec, const AuxChannelSolution& s);

struct GammaResult {
  double equivocation = 0.0;  // Γ(D)
  AuxChannelSolution solution;
};

// Γ(D): maximum H(X_h|U,Z) over channels meeting every distortion bound.
GammaResult gamma_of_d(const SourceSpec& spec, std::span<const double> D,
                       const SolveOptions& options = {});

struct RateResult {
  double rate = 0.0;   // R(D,E)
  double gamma = 0.0;  // Γ(D), computed for the feasibility check
  AuxChannelSolution solution;
};

// R(D,E): minimum rate over channels meeting the distortion bounds and
// H(X_h|U,Z) >= E. Throws InfeasiblePrivacyError when E > Γ(D) + 1e-6.
RateResult rate_de(const SourceSpec& spec, std::span<const double> D, double E,
                   const SolveOptions& options = {});

struct TradeoffPoint {
  std::vector<double> D;
  double E = 0.0;
  double rate = 0.0;  // meaningful only when feasible
  double gamma = 0.0; // Γ(D) at this D
  bool feasible = false;
  std::optional<AuxChannelSolution> solution;
};

// One point per (D, E) pair; infeasible pairs are flagged, not errors.
// Neighbor solutions are propagated across the grid so the reported
// surface is monotone: R non-increasing in D, non-decreasing in E.
std::vector<TradeoffPoint> tradeoff_region(
    const SourceSpec& spec, std::span<const std::vector<double>> d_grid,
    std::span<const double> e_grid, const SolveOptions& options = {});

// Minimum of the R(D,E) objective over channels with conditional entries on
// the 1/q grid; an upper bound on R(D,E) that tightens as q grows. Only
// offered at oracle scale (see SizeError).
double brute_force_rde(const SourceSpec& spec, std::span<const double> D,
                       double E, int q, const SolveOptions& options = {});

}  // namespace rdeq

#endif  // RDEQ_RDE_HPP_
