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

#include "rdeq/rd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdeq {

namespace detail {

namespace {

constexpr double kTiny = 1e-300;

// Expected distortion and I(X; X̂) of a channel over the active rows.
struct Evaluation {
  double rate;
  double distortion;
};

Evaluation evaluate(std::span<const double> px, const DistortionMatrix& d,
                    std::span<const double> channel) {
  const std::size_t n = d.rows(), m = d.cols();
  std::vector<double> marginal(m, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t y = 0; y < m; ++y) {
      marginal[y] += px[x] * channel[x * m + y];
    }
  }
  double rate = 0.0, distortion = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t y = 0; y < m; ++y) {
      const double c = channel[x * m + y];
      if (c > 0.0) rate += px[x] * c * std::log2(c / marginal[y]);
      distortion += px[x] * c * d.at(x, y);
    }
  }
  if (rate < 0.0) rate = 0.0;
  return {rate, distortion};
}

// Alternating minimization of I - s*D at a fixed slope s < 0. Rows are
// rescaled by their minimum distortion so the exponentials stay bounded for
// arbitrarily steep slopes. Returns the converged channel in `channel`.
void solve_at_slope(std::span<const double> px, const DistortionMatrix& d,
                    double s, const RdOptions& options,
                    std::vector<double>& marginal,
                    std::vector<double>& channel) {
  const std::size_t n = d.rows(), m = d.cols();
  std::vector<double> weight(n * m);
  for (std::size_t x = 0; x < n; ++x) {
    double row_min = d.at(x, 0);
    for (std::size_t y = 1; y < m; ++y) row_min = std::min(row_min, d.at(x, y));
    for (std::size_t y = 0; y < m; ++y) {
      weight[x * m + y] = std::exp2(s * (d.at(x, y) - row_min));
    }
  }

  double prev_objective = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < options.max_inner_iterations; ++iter) {
    double objective = 0.0;
    std::vector<double> next(m, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      if (px[x] <= 0.0) continue;
      double denom = 0.0;
      for (std::size_t y = 0; y < m; ++y) {
        denom += marginal[y] * weight[x * m + y];
      }
      objective -= px[x] * std::log2(std::max(denom, kTiny));
      for (std::size_t y = 0; y < m; ++y) {
        const double c = marginal[y] * weight[x * m + y] / denom;
        channel[x * m + y] = c;
        next[y] += px[x] * c;
      }
    }
    marginal = next;
    if (std::abs(prev_objective - objective) < options.objective_tolerance) {
      break;
    }
    prev_objective = objective;
  }
}

// Minimum-I channel restricted to the per-row distortion minimizers; this
// is the D = D_min endpoint (slope -> -inf).
void solve_masked(std::span<const double> px, const DistortionMatrix& d,
                  const RdOptions& options, std::vector<double>& channel) {
  const std::size_t n = d.rows(), m = d.cols();
  std::vector<double> mask(n * m, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double row_min = d.at(x, 0);
    for (std::size_t y = 1; y < m; ++y) row_min = std::min(row_min, d.at(x, y));
    for (std::size_t y = 0; y < m; ++y) {
      if (d.at(x, y) <= row_min) mask[x * m + y] = 1.0;
    }
  }
  std::vector<double> marginal(m, 1.0 / static_cast<double>(m));
  double prev_objective = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < options.max_inner_iterations; ++iter) {
    double objective = 0.0;
    std::vector<double> next(m, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
      if (px[x] <= 0.0) continue;
      double denom = 0.0;
      for (std::size_t y = 0; y < m; ++y) {
        denom += marginal[y] * mask[x * m + y];
      }
      objective -= px[x] * std::log2(std::max(denom, kTiny));
      for (std::size_t y = 0; y < m; ++y) {
        const double c = marginal[y] * mask[x * m + y] / denom;
        channel[x * m + y] = c;
        next[y] += px[x] * c;
      }
    }
    marginal = next;
    if (std::abs(prev_objective - objective) < options.objective_tolerance) {
      break;
    }
    prev_objective = objective;
  }
}

// Deterministic rows for source symbols with zero probability: point mass
// on the row's own distortion minimizer (lowest index on ties). These rows
// do not affect R(D).
void fill_inactive_rows(std::span<const double> px, const DistortionMatrix& d,
                        std::vector<double>& channel) {
  const std::size_t m = d.cols();
  for (std::size_t x = 0; x < d.rows(); ++x) {
    if (px[x] > 0.0) continue;
    std::size_t best = 0;
    for (std::size_t y = 1; y < m; ++y) {
      if (d.at(x, y) < d.at(x, best)) best = y;
    }
    for (std::size_t y = 0; y < m; ++y) channel[x * m + y] = 0.0;
    channel[x * m + best] = 1.0;
  }
}

}  // namespace

std::pair<double, double> raw_distortion_bounds(std::span<const double> px,
                                                const DistortionMatrix& d) {
  double d_min = 0.0;
  for (std::size_t x = 0; x < d.rows(); ++x) {
    double row_min = d.at(x, 0);
    for (std::size_t y = 1; y < d.cols(); ++y) {
      row_min = std::min(row_min, d.at(x, y));
    }
    d_min += px[x] * row_min;
  }
  double d_max = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < d.cols(); ++y) {
    double expected = 0.0;
    for (std::size_t x = 0; x < d.rows(); ++x) {
      expected += px[x] * d.at(x, y);
    }
    d_max = std::min(d_max, expected);
  }
  return {d_min, d_max};
}

BaResult ba_rate_distortion(std::span<const double> px,
                            const DistortionMatrix& d, double D,
                            const RdOptions& options) {
  const std::size_t n = d.rows(), m = d.cols();
  if (px.size() != n) {
    throw ValidationError("prior size does not match distortion matrix rows");
  }
  const auto [d_min, d_max] = raw_distortion_bounds(px, d);
  if (D < d_min - 1e-12) {
    throw InfeasibleDistortionError(
        "distortion target " + std::to_string(D) +
        " is below the minimum achievable " + std::to_string(d_min));
  }

  BaResult result;
  result.channel.assign(n * m, 0.0);

  if (D >= d_max) {
    // Zero-rate regime: best constant reconstruction, lowest index on ties.
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < m; ++y) {
      double expected = 0.0;
      for (std::size_t x = 0; x < n; ++x) expected += px[x] * d.at(x, y);
      if (expected < best_value) {
        best_value = expected;
        best = y;
      }
    }
    for (std::size_t x = 0; x < n; ++x) result.channel[x * m + best] = 1.0;
    result.rate = 0.0;
    result.distortion = best_value;
    result.slope = 0.0;
    return result;
  }

  if (D <= d_min + 1e-13) {
    solve_masked(px, d, options, result.channel);
    fill_inactive_rows(px, d, result.channel);
    auto eval = evaluate(px, d, result.channel);
    result.rate = eval.rate;
    result.distortion = eval.distortion;
    result.slope = -std::numeric_limits<double>::infinity();
    return result;
  }

  // Bracket the slope: D(s) is non-decreasing in s, D(s) -> d_min as
  // s -> -inf and -> d_max as s -> 0-.
  std::vector<double> marginal(m, 1.0 / static_cast<double>(m));
  std::vector<double> channel(n * m, 0.0);
  auto distortion_at = [&](double s) {
    // Fresh start per slope: a warm-started marginal can pin support that
    // the optimum at this slope needs back.
    std::fill(marginal.begin(), marginal.end(), 1.0 / static_cast<double>(m));
    solve_at_slope(px, d, s, options, marginal, channel);
    return evaluate(px, d, channel).distortion;
  };

  double s_hi = -1e-8;
  double d_hi = distortion_at(s_hi);
  if (d_hi <= D) {
    // Target sits between D(s_hi) and d_max; the s_hi channel is feasible
    // and its rate is within the solver tolerance of R(D).
    fill_inactive_rows(px, d, channel);
    auto eval = evaluate(px, d, channel);
    result.channel = channel;
    result.rate = eval.rate;
    result.distortion = eval.distortion;
    result.slope = s_hi;
    return result;
  }

  double s_lo = -1.0;
  double d_lo = distortion_at(s_lo);
  while (d_lo > D && s_lo > -1e7) {
    s_lo *= 2.0;
    d_lo = distortion_at(s_lo);
  }

  // Keep the bracket invariant D(s_lo) <= D <= D(s_hi) and report the
  // feasible side.
  for (int iter = 0; iter < 200 && D - d_lo > options.distortion_tolerance;
       ++iter) {
    const double mid = 0.5 * (s_lo + s_hi);
    const double d_mid = distortion_at(mid);
    if (d_mid <= D) {
      s_lo = mid;
      d_lo = d_mid;
    } else {
      s_hi = mid;
    }
    if (s_hi - s_lo < 1e-14 * std::max(1.0, std::abs(s_lo))) break;
  }

  std::fill(marginal.begin(), marginal.end(), 1.0 / static_cast<double>(m));
  solve_at_slope(px, d, s_lo, options, marginal, channel);
  fill_inactive_rows(px, d, channel);
  auto eval = evaluate(px, d, channel);
  result.channel = channel;
  result.rate = eval.rate;
  result.distortion = eval.distortion;
  result.slope = s_lo;
  return result;
}

}  // namespace detail

namespace {

Alphabet output_alphabet_for(const RdOptions& options, std::size_t cols) {
  if (options.output_alphabet) {
    if (options.output_alphabet->size() != cols) {
      throw ValidationError("output alphabet size does not match the distortion matrix");
    }
    return *options.output_alphabet;
  }
  std::vector<std::string> symbols;
  symbols.reserve(cols);
  for (std::size_t i = 0; i < cols; ++i) symbols.push_back(std::to_string(i));
  return Alphabet("xhat", std::move(symbols));
}

}  // namespace

std::pair<double, double> distortion_bounds(const JointPmf& prior,
                                            const DistortionMatrix& d) {
  if (d.rows() != prior.cell_count()) {
    throw ValidationError("distortion matrix rows do not match the prior");
  }
  return detail::raw_distortion_bounds(prior.raw(), d);
}

RDPoint rate_distortion(const JointPmf& prior, const DistortionMatrix& d,
                        double D, const RdOptions& options) {
  if (d.rows() != prior.cell_count()) {
    throw ValidationError("distortion matrix rows do not match the prior");
  }
  auto ba = detail::ba_rate_distortion(prior.raw(), d, D, options);
  Alphabet out = output_alphabet_for(options, d.cols());
  RDPoint point{D, ba.distortion, ba.rate, ba.slope,
                Channel(prior.axes(), {out}, std::move(ba.channel))};
  return point;
}

std::vector<RdCurveEntry> rd_curve(const JointPmf& prior,
                                   const DistortionMatrix& d,
                                   std::span<const double> grid,
                                   const RdOptions& options,
                                   const ExecPolicy& policy) {
  std::vector<RdCurveEntry> entries(grid.size());
  parallel_for(policy, grid.size(), [&](std::size_t i) {
    entries[i].target = grid[i];
    try {
      entries[i].point = rate_distortion(prior, d, grid[i], options);
    } catch (const InfeasibleError& e) {
      entries[i].error = e.what();
    }
  });
  return entries;
}

}  // namespace rdeq
