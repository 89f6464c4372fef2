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
// Test-only oracles, independent of the solver paths they check:
// closed-form binary quantities and an exhaustive search over quantized
// channels for small alphabets.

#ifndef RDEQ_TESTS_ORACLES_HPP_
#define RDEQ_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rdeq/distortion.hpp"
#include "rdeq/model.hpp"
#include "rdeq/prob.hpp"
#include "rdeq/rng.hpp"

namespace oracles {

inline double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

// R(D) = 1 - h2(D) for a uniform binary source under Hamming distortion.
inline double binary_rd(double d) {
  if (d >= 0.5) return 0.0;
  return 1.0 - binary_entropy(d);
}

struct QuantizedRdResult {
  double rate = std::numeric_limits<double>::infinity();
  double distortion = 0.0;  // achieved by the minimizer
  bool feasible = false;
};

// Exhaustive minimum of I(X;X̂) over channels whose rows are compositions
// of `steps` (entries on the 1/steps grid) subject to E[d] <= D.
// Supports up to 3 source symbols. Branch-and-bound: a pair of fixed rows
// lower-bounds the objective by the weighted divergence to their barycenter.
inline QuantizedRdResult exhaustive_rd(std::span<const double> px,
                                       const rdeq::DistortionMatrix& d,
                                       double D, int steps = 64) {
  const std::size_t n = d.rows(), m = d.cols();

  // Composition list with per-composition entropy and per-row distortion.
  std::vector<std::vector<double>> rows;
  {
    std::vector<int> cur(m, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int rest) {
      if (pos == m - 1) {
        cur[pos] = rest;
        std::vector<double> r(m);
        for (std::size_t i = 0; i < m; ++i) {
          r[i] = static_cast<double>(cur[i]) / steps;
        }
        rows.push_back(std::move(r));
        return;
      }
      for (int v = 0; v <= rest; ++v) {
        cur[pos] = v;
        rec(pos + 1, rest - v);
      }
    };
    rec(0, steps);
  }
  const std::size_t nc = rows.size();
  std::vector<double> row_entropy(nc, 0.0);
  for (std::size_t i = 0; i < nc; ++i) {
    for (double v : rows[i]) {
      if (v > 0.0) row_entropy[i] -= v * std::log2(v);
    }
  }
  // Per source symbol: distortion of each composition.
  std::vector<std::vector<double>> dist(n, std::vector<double>(nc, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t i = 0; i < nc; ++i) {
      double acc = 0.0;
      for (std::size_t y = 0; y < m; ++y) acc += rows[i][y] * d.at(x, y);
      dist[x][i] = acc;
    }
  }

  auto mix_entropy = [&](std::span<const double> q) {
    double h = 0.0;
    for (double v : q) {
      if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
  };

  QuantizedRdResult best;

  if (n == 1) {
    for (std::size_t i = 0; i < nc; ++i) {
      if (dist[0][i] <= D + 1e-12 && 0.0 < best.rate) {
        best = {0.0, dist[0][i], true};
        break;
      }
    }
    return best;
  }

  // Process rows in decreasing probability order (pruning strength).
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return px[a] > px[b]; });

  if (n == 2) {
    const std::size_t a = order[0], b = order[1];
    std::vector<QuantizedRdResult> per_i(nc);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(nc); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      QuantizedRdResult local;
      std::vector<double> q(m);
      for (std::size_t j = 0; j < nc; ++j) {
        const double dd = px[a] * dist[a][i] + px[b] * dist[b][j];
        if (dd > D + 1e-12) continue;
        for (std::size_t y = 0; y < m; ++y) {
          q[y] = px[a] * rows[i][y] + px[b] * rows[j][y];
        }
        const double rate = mix_entropy(q) - px[a] * row_entropy[i] -
                            px[b] * row_entropy[j];
        if (rate < local.rate) local = {rate, dd, true};
      }
      per_i[i] = local;
    }
    for (const auto& r : per_i) {
      if (r.feasible && r.rate < best.rate) best = r;
    }
    if (!best.feasible) best.rate = 0.0;
    return best;
  }

  // n == 3.
  const std::size_t a = order[0], b = order[1], cidx = order[2];
  double min_dc = *std::min_element(dist[cidx].begin(), dist[cidx].end());
  // Third-row compositions sorted by distortion for prefix feasibility.
  std::vector<std::size_t> by_dist(nc);
  std::iota(by_dist.begin(), by_dist.end(), 0);
  std::sort(by_dist.begin(), by_dist.end(), [&](std::size_t u, std::size_t v) {
    return dist[cidx][u] < dist[cidx][v];
  });

  std::vector<QuantizedRdResult> per_i(nc);
  double shared_best = std::numeric_limits<double>::infinity();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(nc); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    QuantizedRdResult local;
    std::vector<double> pair_mix(m), q(m);
    double bound_best;
#ifdef _OPENMP
#pragma omp atomic read
    bound_best = shared_best;
#else
    bound_best = shared_best;
#endif
    for (std::size_t j = 0; j < nc; ++j) {
      const double base = px[a] * dist[a][i] + px[b] * dist[b][j];
      if (base + px[cidx] * min_dc > D + 1e-12) continue;

      // Lower bound: the third row can at best move the mixture to the
      // weighted barycenter of the first two rows.
      const double wa = px[a], wb = px[b];
      double bound = 0.0;
      for (std::size_t y = 0; y < m; ++y) {
        pair_mix[y] = (wa * rows[i][y] + wb * rows[j][y]) / (wa + wb);
      }
      for (std::size_t y = 0; y < m; ++y) {
        if (rows[i][y] > 0.0) {
          bound += wa * rows[i][y] * std::log2(rows[i][y] / pair_mix[y]);
        }
        if (rows[j][y] > 0.0) {
          bound += wb * rows[j][y] * std::log2(rows[j][y] / pair_mix[y]);
        }
      }
      const double cutoff = std::min(local.rate, bound_best);
      if (bound > cutoff + 1e-12) continue;

      for (std::size_t kk = 0; kk < nc; ++kk) {
        const std::size_t k = by_dist[kk];
        const double dd = base + px[cidx] * dist[cidx][k];
        if (dd > D + 1e-12) break;  // sorted by third-row distortion
        for (std::size_t y = 0; y < m; ++y) {
          q[y] = wa * rows[i][y] + wb * rows[j][y] + px[cidx] * rows[k][y];
        }
        const double rate = mix_entropy(q) - wa * row_entropy[i] -
                            wb * row_entropy[j] -
                            px[cidx] * row_entropy[k];
        if (rate < local.rate) local = {rate, dd, true};
      }
      if (local.rate < bound_best) {
        bound_best = local.rate;
#ifdef _OPENMP
#pragma omp atomic write
        shared_best = bound_best;
#else
        shared_best = bound_best;
#endif
      }
    }
    per_i[i] = local;
  }
  for (const auto& r : per_i) {
    if (r.feasible && r.rate < best.rate) best = r;
  }
  return best;
}

// --- Random model builders (seeded, deterministic). ---

inline rdeq::Alphabet digit_alphabet(const std::string& name, std::size_t n) {
  std::vector<std::string> symbols;
  for (std::size_t i = 0; i < n; ++i) symbols.push_back(std::to_string(i));
  return rdeq::Alphabet(name, std::move(symbols));
}

inline std::vector<double> random_pmf(rdeq::SplitMix64& rng, std::size_t n,
                                      double floor = 0.02) {
  std::vector<double> mass(n);
  rdeq::dirichlet_row(rng, mass);
  double total = 0.0;
  for (double& v : mass) {
    v += floor;
    total += v;
  }
  for (double& v : mass) v /= total;
  return mass;
}

// K = 1 census model: one attribute, public and private, Hamming utility.
inline rdeq::SourceSpec census_spec(std::vector<double> pmf, double bound,
                                    double equiv_bound = 0.0) {
  rdeq::Alphabet x = digit_alphabet("x", pmf.size());
  rdeq::SourceSpec spec{
      rdeq::AttributeRoles{{"x"}, {"x"}, {"x"}, {"x"}},
      rdeq::JointPmf({x}, std::move(pmf)),
      "",
      {rdeq::Alphabet("x_hat", x.symbols())},
      rdeq::UtilitySpec{{rdeq::UtilityConstraint{{}, rdeq::DistortionKind::kHamming, {}, {}, {}, bound}}},
      rdeq::PrivacySpec{equiv_bound}};
  spec.validate();
  return spec;
}

// K = 1 census model with an extra side-information axis appended.
inline rdeq::SourceSpec census_spec_with_z(std::span<const double> px,
                                           std::span<const double> pz_given_x,
                                           std::size_t nz, double bound,
                                           double equiv_bound = 0.0) {
  rdeq::Alphabet x = digit_alphabet("x", px.size());
  rdeq::Alphabet z = digit_alphabet("z", nz);
  std::vector<double> joint(px.size() * nz);
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t k = 0; k < nz; ++k) {
      joint[i * nz + k] = px[i] * pz_given_x[i * nz + k];
    }
  }
  rdeq::SourceSpec spec{
      rdeq::AttributeRoles{{"x"}, {"x"}, {"x"}, {"x"}},
      rdeq::JointPmf({x, z}, std::move(joint)),
      "z",
      {rdeq::Alphabet("x_hat", x.symbols())},
      rdeq::UtilitySpec{{rdeq::UtilityConstraint{{}, rdeq::DistortionKind::kHamming, {}, {}, {}, bound}}},
      rdeq::PrivacySpec{equiv_bound}};
  spec.validate();
  return spec;
}

// Two attributes: `a` public, `b` private, optional side information.
inline rdeq::SourceSpec two_attribute_spec(std::size_t na, std::size_t nb,
                                           std::size_t nz,
                                           std::vector<double> joint,
                                           double bound) {
  rdeq::Alphabet a = digit_alphabet("a", na);
  rdeq::Alphabet b = digit_alphabet("b", nb);
  std::vector<rdeq::Alphabet> axes{a, b};
  std::string side;
  if (nz > 1) {
    axes.push_back(digit_alphabet("z", nz));
    side = "z";
  }
  rdeq::SourceSpec spec{
      rdeq::AttributeRoles{{"a", "b"}, {"a"}, {"b"}, {"a", "b"}},
      rdeq::JointPmf(axes, std::move(joint)),
      side,
      {rdeq::Alphabet("a_hat", a.symbols())},
      rdeq::UtilitySpec{{rdeq::UtilityConstraint{{}, rdeq::DistortionKind::kHamming, {}, {}, {}, bound}}},
      rdeq::PrivacySpec{0.0}};
  spec.validate();
  return spec;
}

}  // namespace oracles

#endif  // RDEQ_TESTS_ORACLES_HPP_
