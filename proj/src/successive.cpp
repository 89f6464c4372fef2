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

#include "rdeq/successive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rdeq {

namespace {

constexpr double kTiny = 1e-300;

// I(X; X̂1) and E[d(X, X̂1)] of the composed channel c1 = c2 ∘ t.
struct CascadeEval {
  double rate = 0.0;
  double distortion = 0.0;
};

CascadeEval eval_cascade(std::span<const double> px,
                         const DistortionMatrix& d,
                         std::span<const double> c2, std::size_t m2,
                         std::span<const double> t, std::size_t m1) {
  const std::size_t n = px.size();
  std::vector<double> c1(n * m1, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y2 = 0; y2 < m2; ++y2) {
      const double w = c2[x * m2 + y2];
      if (w <= 0.0) continue;
      for (std::size_t y1 = 0; y1 < m1; ++y1) {
        c1[x * m1 + y1] += w * t[y2 * m1 + y1];
      }
    }
  }
  std::vector<double> marginal(m1, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y1 = 0; y1 < m1; ++y1) {
      marginal[y1] += px[x] * c1[x * m1 + y1];
    }
  }
  CascadeEval out;
  for (std::size_t x = 0; x < n; ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t y1 = 0; y1 < m1; ++y1) {
      const double p = c1[x * m1 + y1];
      if (p > 0.0) out.rate += px[x] * p * std::log2(p / marginal[y1]);
      out.distortion += px[x] * p * d.at(x, y1);
    }
  }
  out.rate = std::max(0.0, out.rate);
  return out;
}

// Convex inner problem: minimize I(X;X̂1) + lambda * E[d] over the
// refinement rows t(x̂1|x̂2) by exponentiated gradient.
struct RefineSolver {
  std::span<const double> px;
  const DistortionMatrix& d;
  std::span<const double> c2;
  std::size_t m2, m1;
  std::size_t max_iterations;

  // Marginal weight of each x̂2 under (px, c2).
  std::vector<double> q2;

  explicit RefineSolver(std::span<const double> px_, const DistortionMatrix& d_,
                        std::span<const double> c2_, std::size_t m2_,
                        std::size_t m1_, std::size_t iters)
      : px(px_), d(d_), c2(c2_), m2(m2_), m1(m1_), max_iterations(iters) {
    q2.assign(m2, 0.0);
    for (std::size_t x = 0; x < px.size(); ++x) {
      for (std::size_t y2 = 0; y2 < m2; ++y2) {
        q2[y2] += px[x] * c2[x * m2 + y2];
      }
    }
  }

  CascadeEval solve(double lambda, std::vector<double>& t) const {
    const std::size_t n = px.size();
    std::vector<double> c1(n * m1), marginal(m1), grad(m2 * m1),
        trial(m2 * m1);

    auto objective = [&](std::span<const double> tt) {
      CascadeEval e = eval_cascade(px, d, c2, m2, tt, m1);
      return std::pair<double, CascadeEval>(e.rate + lambda * e.distortion, e);
    };

    auto [phi, eval] = objective(t);
    double step = 0.5;
    int calm = 0;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
      // Gradient at t.
      std::fill(c1.begin(), c1.end(), 0.0);
      std::fill(marginal.begin(), marginal.end(), 0.0);
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y2 = 0; y2 < m2; ++y2) {
          const double w = c2[x * m2 + y2];
          if (w <= 0.0) continue;
          for (std::size_t y1 = 0; y1 < m1; ++y1) {
            c1[x * m1 + y1] += w * t[y2 * m1 + y1];
          }
        }
      }
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y1 = 0; y1 < m1; ++y1) {
          marginal[y1] += px[x] * c1[x * m1 + y1];
        }
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t x = 0; x < n; ++x) {
        if (px[x] <= 0.0) continue;
        for (std::size_t y2 = 0; y2 < m2; ++y2) {
          const double w = px[x] * c2[x * m2 + y2];
          if (w <= 0.0) continue;
          for (std::size_t y1 = 0; y1 < m1; ++y1) {
            grad[y2 * m1 + y1] +=
                w * (std::log2(std::max(c1[x * m1 + y1], kTiny) /
                               std::max(marginal[y1], kTiny)) +
                     lambda * d.at(x, y1));
          }
        }
      }

      bool accepted = false;
      for (int back = 0; back < 40; ++back) {
        for (std::size_t y2 = 0; y2 < m2; ++y2) {
          if (q2[y2] <= 0.0) {
            for (std::size_t y1 = 0; y1 < m1; ++y1) {
              trial[y2 * m1 + y1] = 1.0 / static_cast<double>(m1);
            }
            continue;
          }
          double total = 0.0;
          for (std::size_t y1 = 0; y1 < m1; ++y1) {
            const double expo = std::clamp(
                -step * grad[y2 * m1 + y1] / q2[y2], -500.0, 500.0);
            const double v =
                std::max(t[y2 * m1 + y1], kTiny) * std::exp(expo);
            trial[y2 * m1 + y1] = v;
            total += v;
          }
          for (std::size_t y1 = 0; y1 < m1; ++y1) trial[y2 * m1 + y1] /= total;
        }
        auto [phi_trial, eval_trial] = objective(trial);
        if (phi_trial <= phi) {
          const double drop = phi - phi_trial;
          t.swap(trial);
          phi = phi_trial;
          eval = eval_trial;
          step = std::min(step * 1.3, 8.0);
          accepted = true;
          calm = drop < 1e-14 * (1.0 + std::abs(phi)) ? calm + 1 : 0;
          break;
        }
        step *= 0.5;
        if (step < 1e-18) break;
      }
      if (!accepted || calm >= 4) break;
    }
    return eval;
  }
};

}  // namespace

StagePlan check_successive(const JointPmf& prior, const DistortionMatrix& d,
                           StageTarget coarse, StageTarget fine,
                           const SuccessiveOptions& options) {
  if (prior.axes().size() != 1) {
    throw UnsupportedModelError(
        "successive disclosure is defined for single-attribute sources");
  }
  if (d.rows() != prior.cell_count()) {
    throw ValidationError("distortion matrix rows do not match the prior");
  }
  if (!(fine.distortion < coarse.distortion)) {
    throw ValidationError(
        "the fine stage must have strictly smaller distortion than the coarse "
        "stage");
  }

  const double h_x = entropy(prior);
  // Per-stage feasibility: E_k <= Γ(D_k) = H(X) - R(D_k).
  RDPoint fine_point = rate_distortion(prior, d, fine.distortion, options.rd);
  RDPoint coarse_point =
      rate_distortion(prior, d, coarse.distortion, options.rd);
  const double gamma_fine = h_x - fine_point.rate;
  const double gamma_coarse = h_x - coarse_point.rate;
  if (fine.equivocation > gamma_fine + 1e-6) {
    throw InfeasiblePrivacyError(
        "fine-stage equivocation bound " + std::to_string(fine.equivocation) +
        " exceeds the maximum achievable " + std::to_string(gamma_fine));
  }
  if (coarse.equivocation > gamma_coarse + 1e-6) {
    throw InfeasiblePrivacyError(
        "coarse-stage equivocation bound " +
        std::to_string(coarse.equivocation) +
        " exceeds the maximum achievable " + std::to_string(gamma_coarse));
  }

  const std::size_t n = prior.cell_count();
  const std::size_t m = d.cols();
  std::span<const double> px = prior.raw();
  std::span<const double> c2(fine_point.channel.raw());

  // Find the refinement stage: minimize I(X;X̂1) through the cascade
  // subject to the coarse distortion bound (a convex problem in t).
  std::vector<double> t(m * m, 1.0 / static_cast<double>(m));
  RefineSolver solver(px, d, c2, m, m, options.max_iterations);

  // Zero-rate shortcut: the best constant coarse view.
  double best_constant = std::numeric_limits<double>::infinity();
  std::size_t best_y = 0;
  for (std::size_t y1 = 0; y1 < m; ++y1) {
    double expected = 0.0;
    for (std::size_t x = 0; x < n; ++x) expected += px[x] * d.at(x, y1);
    if (expected < best_constant) {
      best_constant = expected;
      best_y = y1;
    }
  }

  CascadeEval achieved;
  if (best_constant <= coarse.distortion) {
    std::fill(t.begin(), t.end(), 0.0);
    for (std::size_t y2 = 0; y2 < m; ++y2) t[y2 * m + best_y] = 1.0;
    achieved = eval_cascade(px, d, c2, m, t, m);
  } else {
    // Bisection on the distortion multiplier; distortion decreases as
    // lambda grows. Keep the feasible (<= D_1) side.
    double lo = 1e-6, hi = 1.0;
    std::vector<double> t_hi(m * m, 1.0 / static_cast<double>(m));
    CascadeEval e_hi = solver.solve(hi, t_hi);
    int guard = 0;
    while (e_hi.distortion > coarse.distortion && guard++ < 60) {
      hi *= 2.0;
      t_hi.assign(m * m, 1.0 / static_cast<double>(m));
      e_hi = solver.solve(hi, t_hi);
    }
    t = t_hi;
    achieved = e_hi;
    for (int iter = 0; iter < 80; ++iter) {
      if (coarse.distortion - achieved.distortion <= 1e-7) break;
      const double mid = 0.5 * (lo + hi);
      std::vector<double> t_mid(m * m, 1.0 / static_cast<double>(m));
      CascadeEval e_mid = solver.solve(mid, t_mid);
      if (e_mid.distortion <= coarse.distortion) {
        hi = mid;
        t = t_mid;
        achieved = e_mid;
      } else {
        lo = mid;
      }
      if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
    }
  }

  StagePlan plan;
  plan.coarse = coarse;
  plan.fine = fine;
  plan.fine_channel = fine_point.channel;
  Alphabet hat2 = fine_point.channel.output().axes()[0];
  Alphabet hat1(hat2.name() + "1", hat2.symbols());
  plan.refine_channel = Channel({hat2}, {hat1}, t);
  plan.rate_fine = fine_point.rate;
  plan.rate_coarse = achieved.rate;
  plan.coarse_distortion = achieved.distortion;
  plan.equivocation_fine = gamma_fine;
  plan.equivocation_coarse = gamma_coarse;

  if (achieved.distortion > coarse.distortion + 1e-6) {
    plan.feasible = false;
    plan.note = "no cascade through the fine-stage channel meets the coarse "
                "distortion bound";
  } else if (std::abs(achieved.rate - coarse_point.rate) >
             options.rate_match_tolerance) {
    plan.feasible = false;
    plan.note = "cascade rate " + std::to_string(achieved.rate) +
                " does not match R(D_1) = " + std::to_string(coarse_point.rate);
  } else {
    plan.feasible = true;
  }
  return plan;
}

std::pair<double, double> disclosure_rates(const StagePlan& plan,
                                           const JointPmf& prior) {
  if (!plan.feasible) {
    throw StateError("disclosure rates are defined only for feasible plans");
  }
  const std::size_t m2 = plan.fine_channel.output_count();
  const std::size_t m1 = plan.refine_channel.output_count();
  // Recompute both stage rates from the stored cascade.
  std::vector<double> marginal2(m2, 0.0);
  std::span<const double> px = prior.raw();
  const std::size_t n = prior.cell_count();
  double rate_fine = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y2 = 0; y2 < m2; ++y2) {
      marginal2[y2] += px[x] * plan.fine_channel.prob(x, y2);
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t y2 = 0; y2 < m2; ++y2) {
      const double p = plan.fine_channel.prob(x, y2);
      if (p > 0.0) rate_fine += px[x] * p * std::log2(p / marginal2[y2]);
    }
  }

  std::vector<double> c1(n * m1, 0.0);
  std::vector<double> marginal1(m1, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y2 = 0; y2 < m2; ++y2) {
      const double w = plan.fine_channel.prob(x, y2);
      if (w <= 0.0) continue;
      for (std::size_t y1 = 0; y1 < m1; ++y1) {
        c1[x * m1 + y1] += w * plan.refine_channel.prob(y2, y1);
      }
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y1 = 0; y1 < m1; ++y1) {
      marginal1[y1] += px[x] * c1[x * m1 + y1];
    }
  }
  double rate_coarse = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t y1 = 0; y1 < m1; ++y1) {
      const double p = c1[x * m1 + y1];
      if (p > 0.0) rate_coarse += px[x] * p * std::log2(p / marginal1[y1]);
    }
  }

  const double r1 = std::max(0.0, rate_coarse);
  const double r0 = std::max(0.0, rate_fine - rate_coarse);
  return {r0, r1};
}

}  // namespace rdeq
