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

#include "rdeq/rde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rdeq/rng.hpp"

namespace rdeq {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kDistortionSlack = 1e-6;
constexpr double kEquivocationSlack = 1e-6;

// ---------------------------------------------------------------------------
// Compiled problem: the spec flattened to index arithmetic.

struct Compiled {
  std::size_t nx = 1;     // product over attribute alphabets
  std::size_t nz = 1;     // side-information alphabet (1 when constant)
  std::size_t nxr = 1;    // public-attribute tuple cells
  std::size_t nxh = 1;    // private-attribute tuple cells
  std::size_t nxhat = 1;  // reconstruction tuple cells
  std::vector<double> pxz;  // nx * nz
  std::vector<double> px;   // row sums of pxz
  std::vector<double> pz;   // column sums
  std::vector<std::size_t> xr_of_x, xh_of_x;
  std::vector<DistortionMatrix> d;  // L effective matrices, nxr x nxhat
  std::vector<double> d_min;        // per-constraint floor E[min d]
  // Support bookkeeping.
  std::vector<std::size_t> x_rank;   // x -> rank among px>0, npos otherwise
  std::vector<std::size_t> xr_rank;  // xr -> rank among supported xr values
  std::size_t support_x = 0, support_xr = 0;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

std::size_t tuple_cell(const AxisLayout& layout, std::size_t flat,
                       std::span<const std::size_t> positions,
                       std::span<const std::size_t> sizes) {
  std::size_t cell = 0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    cell = cell * sizes[k] + layout.digit(flat, positions[k]);
  }
  return cell;
}

Compiled compile(const SourceSpec& spec) {
  Compiled c;
  const auto& layout = spec.joint.layout();
  const std::size_t n_attr = spec.roles.all.size();

  c.nz = spec.has_side_info() ? layout.axes().back().size() : 1;
  c.nx = spec.joint.cell_count() / c.nz;
  c.pxz.assign(spec.joint.raw().begin(), spec.joint.raw().end());
  // The validated layout is (attributes..., z) row-major with z fastest, so
  // pxz is already addressed as [x * nz + z].
  c.px.assign(c.nx, 0.0);
  c.pz.assign(c.nz, 0.0);
  for (std::size_t x = 0; x < c.nx; ++x) {
    for (std::size_t z = 0; z < c.nz; ++z) {
      c.px[x] += c.pxz[x * c.nz + z];
      c.pz[z] += c.pxz[x * c.nz + z];
    }
  }

  auto pub_pos = spec.public_positions();
  auto priv_pos = spec.private_positions();
  std::vector<std::size_t> pub_sizes, priv_sizes;
  for (std::size_t p : pub_pos) pub_sizes.push_back(layout.axes()[p].size());
  for (std::size_t p : priv_pos) priv_sizes.push_back(layout.axes()[p].size());
  c.nxr = 1;
  for (std::size_t s : pub_sizes) c.nxr *= s;
  c.nxh = 1;
  for (std::size_t s : priv_sizes) c.nxh *= s;
  for (const auto& r : spec.reconstruction) c.nxhat *= r.size();

  // x indices walk the attribute axes only; embed them in the full layout
  // by scaling with nz (z is the fastest axis).
  c.xr_of_x.resize(c.nx);
  c.xh_of_x.resize(c.nx);
  for (std::size_t x = 0; x < c.nx; ++x) {
    const std::size_t flat = x * c.nz;  // z digit 0
    c.xr_of_x[x] = tuple_cell(layout, flat, pub_pos, pub_sizes);
    c.xh_of_x[x] = tuple_cell(layout, flat, priv_pos, priv_sizes);
  }
  (void)n_attr;

  for (std::size_t l = 0; l < spec.utility.constraints.size(); ++l) {
    c.d.push_back(effective_distortion(spec, l));
  }
  for (const auto& mat : c.d) {
    double floor = 0.0;
    for (std::size_t x = 0; x < c.nx; ++x) {
      double row_min = mat.at(c.xr_of_x[x], 0);
      for (std::size_t y = 1; y < c.nxhat; ++y) {
        row_min = std::min(row_min, mat.at(c.xr_of_x[x], y));
      }
      floor += c.px[x] * row_min;
    }
    c.d_min.push_back(floor);
  }

  c.x_rank.assign(c.nx, Compiled::npos);
  c.xr_rank.assign(c.nxr, Compiled::npos);
  for (std::size_t x = 0; x < c.nx; ++x) {
    if (c.px[x] <= 0.0) continue;
    c.x_rank[x] = c.support_x++;
    if (c.xr_rank[c.xr_of_x[x]] == Compiled::npos) {
      c.xr_rank[c.xr_of_x[x]] = c.support_xr++;
    }
  }
  return c;
}

void check_distortion_vector(const Compiled& c, std::span<const double> D) {
  if (D.size() != c.d.size()) {
    throw ValidationError("expected " + std::to_string(c.d.size()) +
                          " distortion bounds, got " + std::to_string(D.size()));
  }
  for (std::size_t l = 0; l < D.size(); ++l) {
    if (!std::isfinite(D[l]) || D[l] < 0.0) {
      throw ValidationError("distortion bounds must be finite and >= 0");
    }
    if (D[l] < c.d_min[l] - 1e-9) {
      throw InfeasibleDistortionError(
          "distortion bound " + std::to_string(D[l]) + " for constraint " +
          std::to_string(l + 1) + " is below the minimum achievable " +
          std::to_string(c.d_min[l]));
    }
  }
}

// ---------------------------------------------------------------------------
// Channel evaluation: joints, rate, equivocation, decoder, distortions.

enum class DecoderMode { kIdentity, kOptimized };

struct Shape {
  std::size_t rows = 0;  // channel parameter rows
  std::size_t nu = 0;
  DecoderMode decoder = DecoderMode::kOptimized;
  std::vector<std::size_t> row_of_x;  // npos => pinned point mass on u0
};

struct Evaluation {
  double rate = 0.0;
  double equivocation = 0.0;
  std::vector<double> distortion;
  std::vector<std::size_t> decoder;  // [u * nz + z]
};

class Evaluator {
 public:
  Evaluator(const Compiled& c, const Shape& s) : c_(c), s_(s) {
    m_u_.resize(s.nu);
    p_uz_.resize(s.nu * c.nz);
    a_xh_.resize(s.nu * c.nz * c.nxh);
    m_xr_.resize(s.nu * c.nz * c.nxr);
    cost_.resize(c.d.size() * c.nxhat);
  }

  // Probability of u for source cell x under channel `ch` (rows x nu).
  double cx(std::span<const double> ch, std::size_t x, std::size_t u) const {
    const std::size_t r = s_.row_of_x[x];
    if (r == Compiled::npos) return u == 0 ? 1.0 : 0.0;
    return ch[r * s_.nu + u];
  }

  // decoder_weights: one positive weight per constraint for the per-(u,z)
  // reconstruction choice; immaterial when L == 1.
  Evaluation evaluate(std::span<const double> ch,
                      std::span<const double> decoder_weights) {
    const std::size_t nu = s_.nu, nz = c_.nz;
    std::fill(p_uz_.begin(), p_uz_.end(), 0.0);
    std::fill(a_xh_.begin(), a_xh_.end(), 0.0);
    std::fill(m_xr_.begin(), m_xr_.end(), 0.0);

    for (std::size_t x = 0; x < c_.nx; ++x) {
      if (c_.px[x] <= 0.0) continue;
      const std::size_t xr = c_.xr_of_x[x], xh = c_.xh_of_x[x];
      for (std::size_t z = 0; z < nz; ++z) {
        const double w0 = c_.pxz[x * nz + z];
        if (w0 <= 0.0) continue;
        for (std::size_t u = 0; u < nu; ++u) {
          const double w = w0 * cx(ch, x, u);
          if (w <= 0.0) continue;
          p_uz_[u * nz + z] += w;
          a_xh_[(u * nz + z) * c_.nxh + xh] += w;
          m_xr_[(u * nz + z) * c_.nxr + xr] += w;
        }
      }
    }
    for (std::size_t u = 0; u < nu; ++u) {
      double m = 0.0;
      for (std::size_t z = 0; z < nz; ++z) m += p_uz_[u * nz + z];
      m_u_[u] = m;
    }

    Evaluation out;
    // I(X;U).
    double i_xu = 0.0;
    for (std::size_t x = 0; x < c_.nx; ++x) {
      if (c_.px[x] <= 0.0) continue;
      for (std::size_t u = 0; u < nu; ++u) {
        const double p = cx(ch, x, u);
        if (p > 0.0 && m_u_[u] > 0.0) {
          i_xu += c_.px[x] * p * std::log2(p / m_u_[u]);
        }
      }
    }
    // I(Z;U); identically zero when nz == 1 because p_uz aggregates to m_u.
    double i_zu = 0.0;
    if (nz > 1) {
      for (std::size_t u = 0; u < nu; ++u) {
        for (std::size_t z = 0; z < nz; ++z) {
          const double p = p_uz_[u * nz + z];
          if (p > 0.0 && m_u_[u] > 0.0 && c_.pz[z] > 0.0) {
            i_zu += p * std::log2(p / (m_u_[u] * c_.pz[z]));
          }
        }
      }
    }
    out.rate = std::max(0.0, i_xu - i_zu);

    // H(X_h | U, Z) and the decoder with its distortions.
    const std::size_t L = c_.d.size();
    out.distortion.assign(L, 0.0);
    out.decoder.assign(nu * nz, 0);
    double equiv = 0.0;
    for (std::size_t u = 0; u < nu; ++u) {
      for (std::size_t z = 0; z < nz; ++z) {
        const std::size_t cell = u * nz + z;
        const double* a = a_xh_.data() + cell * c_.nxh;
        double b = 0.0;
        for (std::size_t h = 0; h < c_.nxh; ++h) b += a[h];
        if (b > 0.0) {
          for (std::size_t h = 0; h < c_.nxh; ++h) {
            if (a[h] > 0.0) equiv -= a[h] * std::log2(a[h] / b);
          }
        }

        const double* mr = m_xr_.data() + cell * c_.nxr;
        for (std::size_t l = 0; l < L; ++l) {
          double* cost = cost_.data() + l * c_.nxhat;
          std::fill(cost, cost + c_.nxhat, 0.0);
          for (std::size_t xr = 0; xr < c_.nxr; ++xr) {
            if (mr[xr] <= 0.0) continue;
            const auto row = c_.d[l].row(xr);
            for (std::size_t y = 0; y < c_.nxhat; ++y) {
              cost[y] += mr[xr] * row[y];
            }
          }
        }
        std::size_t pick;
        if (s_.decoder == DecoderMode::kIdentity) {
          pick = u;  // nu == nxhat by construction
        } else {
          pick = 0;
          double best = std::numeric_limits<double>::infinity();
          for (std::size_t y = 0; y < c_.nxhat; ++y) {
            double weighted = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
              weighted += decoder_weights[l] * cost_[l * c_.nxhat + y];
            }
            if (weighted < best) {
              best = weighted;
              pick = y;
            }
          }
        }
        out.decoder[cell] = pick;
        for (std::size_t l = 0; l < L; ++l) {
          out.distortion[l] += cost_[l * c_.nxhat + pick];
        }
      }
    }
    out.equivocation = std::max(0.0, equiv);
    return out;
  }

  // Same quantities for an externally fixed decoder.
  Evaluation evaluate_with_decoder(std::span<const double> ch,
                                   std::span<const std::size_t> decoder) {
    Evaluation out = evaluate(ch, std::vector<double>(c_.d.size(), 1.0));
    out.decoder.assign(decoder.begin(), decoder.end());
    std::fill(out.distortion.begin(), out.distortion.end(), 0.0);
    const std::size_t nz = c_.nz;
    for (std::size_t u = 0; u < s_.nu; ++u) {
      for (std::size_t z = 0; z < nz; ++z) {
        const std::size_t cell = u * nz + z;
        const double* mr = m_xr_.data() + cell * c_.nxr;
        const std::size_t y = decoder[cell];
        for (std::size_t l = 0; l < c_.d.size(); ++l) {
          double acc = 0.0;
          for (std::size_t xr = 0; xr < c_.nxr; ++xr) {
            if (mr[xr] > 0.0) acc += mr[xr] * c_.d[l].at(xr, y);
          }
          out.distortion[l] += acc;
        }
      }
    }
    return out;
  }

  // Gradient helpers; all in bits, valid at the preceding evaluate() call.
  // d rate / d ch[row][u], accumulated over the row's source cells.
  void rate_gradient(std::span<const double> ch, std::vector<double>& g) {
    const std::size_t nu = s_.nu, nz = c_.nz;
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t x = 0; x < c_.nx; ++x) {
      const std::size_t r = s_.row_of_x[x];
      if (r == Compiled::npos || c_.px[x] <= 0.0) continue;
      for (std::size_t u = 0; u < nu; ++u) {
        double term =
            c_.px[x] * std::log2(std::max(ch[r * nu + u], kTiny));
        for (std::size_t z = 0; z < nz; ++z) {
          const double w = c_.pxz[x * nz + z];
          if (w <= 0.0) continue;
          term -= w * std::log2(std::max(p_uz_[u * nz + z], kTiny) /
                                c_.pz[z]);
        }
        g[r * nu + u] += term;
      }
    }
  }

  // d H(X_h|U,Z) / d ch[row][u]; nonnegative.
  void equivocation_gradient(std::vector<double>& g) {
    const std::size_t nu = s_.nu, nz = c_.nz;
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t x = 0; x < c_.nx; ++x) {
      const std::size_t r = s_.row_of_x[x];
      if (r == Compiled::npos || c_.px[x] <= 0.0) continue;
      const std::size_t xh = c_.xh_of_x[x];
      for (std::size_t u = 0; u < nu; ++u) {
        double term = 0.0;
        for (std::size_t z = 0; z < nz; ++z) {
          const double w = c_.pxz[x * nz + z];
          if (w <= 0.0) continue;
          const std::size_t cell = u * nz + z;
          const double* a = a_xh_.data() + cell * c_.nxh;
          double b = 0.0;
          for (std::size_t h = 0; h < c_.nxh; ++h) b += a[h];
          term -= w * std::log2(std::max(a[xh], kTiny) / std::max(b, kTiny));
        }
        g[r * nu + u] += term;
      }
    }
  }

  // d Δ_l / d ch[row][u] under the given decoder.
  void distortion_gradient(std::size_t l,
                           std::span<const std::size_t> decoder,
                           std::vector<double>& g) {
    const std::size_t nu = s_.nu, nz = c_.nz;
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t x = 0; x < c_.nx; ++x) {
      const std::size_t r = s_.row_of_x[x];
      if (r == Compiled::npos || c_.px[x] <= 0.0) continue;
      const std::size_t xr = c_.xr_of_x[x];
      for (std::size_t u = 0; u < nu; ++u) {
        double term = 0.0;
        for (std::size_t z = 0; z < nz; ++z) {
          const double w = c_.pxz[x * nz + z];
          if (w <= 0.0) continue;
          term += w * c_.d[l].at(xr, decoder[u * nz + z]);
        }
        g[r * nu + u] += term;
      }
    }
  }

 private:
  const Compiled& c_;
  const Shape& s_;
  std::vector<double> m_u_, p_uz_, a_xh_, m_xr_, cost_;
};

bool is_feasible(const Evaluation& e, std::span<const double> D,
                 std::optional<double> E) {
  for (std::size_t l = 0; l < D.size(); ++l) {
    if (e.distortion[l] > D[l] + kDistortionSlack) return false;
  }
  if (E && e.equivocation < *E - kEquivocationSlack) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Augmented-Lagrangian solve with exponentiated-gradient inner steps.

enum class Objective { kMinRate, kMaxEquivocation };

struct Candidate {
  std::vector<double> channel;  // rows x nu
  Evaluation eval;
  bool feasible = false;
  std::size_t order = 0;  // deterministic tie-break
  std::int64_t iterations = 0;
};

// Augmented-Lagrangian penalty (max(0, lam + rho v)^2 - lam^2) / (2 rho).
double al_penalty(double v, double lam, double rho) {
  const double t = std::max(0.0, lam + rho * v);
  return (t * t - lam * lam) / (2.0 * rho);
}

struct AlProblem {
  const Compiled& c;
  const Shape& shape;
  Objective objective;
  std::vector<double> D;
  std::optional<double> E;
  int max_outer;
  int max_inner;
};

// Runs the optimizer from one starting channel; records the best feasible
// evaluation seen (including the raw start).
Candidate optimize_from(const AlProblem& prob, std::vector<double> ch,
                        std::size_t order) {
  const std::size_t rows = prob.shape.rows, nu = prob.shape.nu;
  const std::size_t L = prob.D.size();
  Evaluator eval(prob.c, prob.shape);

  std::vector<double> row_weight(rows, 0.0);
  for (std::size_t x = 0; x < prob.c.nx; ++x) {
    const std::size_t r = prob.shape.row_of_x[x];
    if (r != Compiled::npos) row_weight[r] += prob.c.px[x];
  }

  auto better = [&](const Evaluation& a, const Evaluation& b) {
    return prob.objective == Objective::kMinRate
               ? a.rate < b.rate
               : a.equivocation > b.equivocation;
  };

  Candidate best;
  best.order = order;
  auto consider = [&](const std::vector<double>& channel,
                      const Evaluation& e) {
    if (!is_feasible(e, prob.D, prob.E)) return;
    if (!best.feasible || better(e, best.eval)) {
      best.feasible = true;
      best.eval = e;
      best.channel = channel;
    }
  };

  std::vector<double> lambda(L, 0.0);
  double nu_mult = 0.0;
  double rho = 4.0;
  std::vector<double> dec_weights(L, 1.0);

  auto phi_of = [&](const Evaluation& e) {
    double phi = prob.objective == Objective::kMinRate ? e.rate
                                                       : -e.equivocation;
    for (std::size_t l = 0; l < L; ++l) {
      phi += al_penalty(e.distortion[l] - prob.D[l], lambda[l], rho);
    }
    if (prob.E) phi += al_penalty(*prob.E - e.equivocation, nu_mult, rho);
    return phi;
  };

  Evaluation cur = eval.evaluate(ch, dec_weights);
  consider(ch, cur);

  std::vector<double> grad(rows * nu), g_rate(rows * nu), g_eq(rows * nu),
      g_dist(rows * nu);
  std::vector<double> trial(rows * nu);

  double prev_violation = std::numeric_limits<double>::infinity();
  double step = 0.5;
  std::int64_t iterations = 0;

  for (int outer = 0; outer < prob.max_outer; ++outer) {
    double phi_cur = phi_of(cur);
    int calm = 0;
    for (int inner = 0; inner < prob.max_inner; ++inner) {
      ++iterations;
      // Assemble the gradient of the augmented objective at `cur`.
      std::fill(grad.begin(), grad.end(), 0.0);
      if (prob.objective == Objective::kMinRate) {
        eval.rate_gradient(ch, g_rate);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g_rate[i];
      }
      double eq_coeff = prob.objective == Objective::kMaxEquivocation ? -1.0 : 0.0;
      if (prob.E) {
        eq_coeff -= std::max(0.0, nu_mult + rho * (*prob.E - cur.equivocation));
      }
      if (eq_coeff != 0.0) {
        eval.equivocation_gradient(g_eq);
        for (std::size_t i = 0; i < grad.size(); ++i) {
          grad[i] += eq_coeff * g_eq[i];
        }
      }
      for (std::size_t l = 0; l < L; ++l) {
        const double coeff =
            std::max(0.0, lambda[l] + rho * (cur.distortion[l] - prob.D[l]));
        if (coeff <= 0.0) continue;
        eval.distortion_gradient(l, cur.decoder, g_dist);
        for (std::size_t i = 0; i < grad.size(); ++i) {
          grad[i] += coeff * g_dist[i];
        }
      }

      // Exponentiated-gradient step with backtracking.
      bool accepted = false;
      for (int back = 0; back < 40; ++back) {
        for (std::size_t r = 0; r < rows; ++r) {
          if (row_weight[r] <= 0.0) {
            for (std::size_t u = 0; u < nu; ++u) {
              trial[r * nu + u] = u == 0 ? 1.0 : 0.0;
            }
            continue;
          }
          double total = 0.0;
          for (std::size_t u = 0; u < nu; ++u) {
            const double expo = std::clamp(
                -step * grad[r * nu + u] / row_weight[r], -500.0, 500.0);
            const double v =
                std::max(ch[r * nu + u], kTiny) * std::exp(expo);
            trial[r * nu + u] = v;
            total += v;
          }
          for (std::size_t u = 0; u < nu; ++u) trial[r * nu + u] /= total;
        }
        Evaluation e = eval.evaluate(trial, dec_weights);
        const double phi_trial = phi_of(e);
        if (phi_trial <= phi_cur) {
          ch.swap(trial);
          cur = std::move(e);
          const double drop = phi_cur - phi_trial;
          phi_cur = phi_trial;
          step = std::min(step * 1.3, 8.0);
          accepted = true;
          calm = drop < 1e-13 * (1.0 + std::abs(phi_cur)) ? calm + 1 : 0;
          break;
        }
        step *= 0.5;
        if (step < 1e-18) break;
      }
      if (!accepted || calm >= 3) break;
    }

    // Multiplier update from the exact constraint values.
    double violation = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      const double v = cur.distortion[l] - prob.D[l];
      lambda[l] = std::max(0.0, lambda[l] + rho * v);
      violation = std::max(violation, v);
      dec_weights[l] = 1.0 + lambda[l];
    }
    if (prob.E) {
      const double v = *prob.E - cur.equivocation;
      nu_mult = std::max(0.0, nu_mult + rho * v);
      violation = std::max(violation, v);
    }
    // Re-evaluate so the candidate uses the refreshed decoder weights.
    cur = eval.evaluate(ch, dec_weights);
    consider(ch, cur);

    if (violation <= 1e-9 && outer > 0) break;
    if (violation > 0.5 * prev_violation) rho = std::min(rho * 2.0, 1e7);
    prev_violation = std::max(violation, 0.0);
  }

  best.iterations = iterations;
  return best;
}

// ---------------------------------------------------------------------------
// Starting points.

std::vector<std::vector<double>> build_inits(
    const Compiled& c, const Shape& shape, std::span<const double> D,
    const SolveOptions& options,
    std::span<const std::vector<double>> carried, const RdOptions& rd_options) {
  const std::size_t rows = shape.rows, nu = shape.nu;
  std::vector<std::vector<double>> inits;

  auto push_rowwise = [&](const std::vector<double>& ch) {
    inits.push_back(ch);
  };
  for (const auto& ch : carried) {
    if (ch.size() == rows * nu) push_rowwise(ch);
  }

  // Test-channel lift: solve the classical R(D_l) problem on the public
  // marginal and condition U on X_r alone. Feasible by construction and the
  // exact optimum for independent or census-like models.
  std::vector<double> pxr(c.nxr, 0.0);
  for (std::size_t x = 0; x < c.nx; ++x) pxr[c.xr_of_x[x]] += c.px[x];
  for (std::size_t l = 0; l < c.d.size(); ++l) {
    if (nu < c.nxhat) break;
    try {
      auto ba = detail::ba_rate_distortion(pxr, c.d[l], D[l], rd_options);
      std::vector<double> ch(rows * nu, 0.0);
      for (std::size_t x = 0; x < c.nx; ++x) {
        const std::size_t r = shape.row_of_x[x];
        if (r == Compiled::npos) continue;
        for (std::size_t y = 0; y < c.nxhat; ++y) {
          ch[r * nu + y] = ba.channel[c.xr_of_x[x] * c.nxhat + y];
        }
      }
      push_rowwise(ch);
    } catch (const InfeasibleError&) {
      // D_l below this constraint's floor is caught earlier; ignore here.
    }
  }

  // Copy of X_r: the minimum-equivocation anchor, distortion-minimal.
  {
    std::vector<double> ch(rows * nu, 0.0);
    bool ok = true;
    for (std::size_t x = 0; x < c.nx && ok; ++x) {
      const std::size_t r = shape.row_of_x[x];
      if (r == Compiled::npos) continue;
      std::size_t u;
      if (shape.decoder == DecoderMode::kIdentity) {
        // Deterministic best reconstruction of this x_r.
        u = 0;
        const auto row = c.d[0].row(c.xr_of_x[x]);
        for (std::size_t y = 1; y < c.nxhat; ++y) {
          if (row[y] < row[u]) u = y;
        }
      } else {
        u = c.xr_rank[c.xr_of_x[x]];
      }
      if (u >= nu) {
        ok = false;
        break;
      }
      ch[r * nu + u] = 1.0;
    }
    if (ok) {
      // Rows may have been written twice with the same value; re-normalize.
      for (std::size_t r = 0; r < rows; ++r) {
        double total = 0.0;
        for (std::size_t u = 0; u < nu; ++u) total += ch[r * nu + u];
        if (total <= 0.0) {
          ch[r * nu] = 1.0;
        } else {
          for (std::size_t u = 0; u < nu; ++u) ch[r * nu + u] /= total;
        }
      }
      push_rowwise(ch);
    }
  }

  // Constant description: the maximum-equivocation anchor. Under the
  // identity decoder the constant symbol IS the reconstruction, so use the
  // best constant output; otherwise the decoder makes the choice.
  {
    std::size_t u0 = 0;
    if (shape.decoder == DecoderMode::kIdentity) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < c.nxhat; ++y) {
        double expected = 0.0;
        for (std::size_t xr = 0; xr < c.nxr; ++xr) {
          expected += pxr[xr] * c.d[0].at(xr, y);
        }
        if (expected < best) {
          best = expected;
          u0 = y;
        }
      }
    }
    std::vector<double> ch(rows * nu, 0.0);
    for (std::size_t r = 0; r < rows; ++r) ch[r * nu + u0] = 1.0;
    push_rowwise(ch);
  }

  // Seeded random interior points.
  for (int k = 0; k < options.restarts; ++k) {
    SplitMix64 rng = substream(options.seed, 0x1000 + static_cast<std::uint64_t>(k));
    std::vector<double> ch(rows * nu);
    for (std::size_t r = 0; r < rows; ++r) {
      dirichlet_row(rng, std::span<double>(ch.data() + r * nu, nu));
    }
    push_rowwise(ch);
  }
  return inits;
}

// Smoothed copy used as the optimizer start so gradients stay finite; the
// raw starting point is still evaluated as a candidate on its own.
std::vector<double> smooth(const std::vector<double>& ch, std::size_t rows,
                           std::size_t nu) {
  std::vector<double> out(ch.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t u = 0; u < nu; ++u) {
      out[r * nu + u] = 0.999 * ch[r * nu + u] + 0.001 / static_cast<double>(nu);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shapes per dispatch case.

Shape make_shape(const Compiled& c, ModelCase mode, const SolveOptions& options,
                 std::size_t L, bool* extended) {
  Shape s;
  *extended = false;
  switch (mode) {
    case ModelCase::kCensusK1:
    case ModelCase::kNoSideInfo:
      s.decoder = DecoderMode::kIdentity;
      s.nu = c.nxhat;
      s.row_of_x = c.x_rank;
      s.rows = c.support_x;
      break;
    case ModelCase::kWynerZivMarkov: {
      s.decoder = DecoderMode::kOptimized;
      s.nu = c.support_xr + L + 1;
      s.rows = c.support_xr;
      s.row_of_x.resize(c.nx);
      for (std::size_t x = 0; x < c.nx; ++x) {
        s.row_of_x[x] = c.x_rank[x] == Compiled::npos
                            ? Compiled::npos
                            : c.xr_rank[c.xr_of_x[x]];
      }
      *extended = L > 1;
      break;
    }
    case ModelCase::kGeneral:
      s.decoder = DecoderMode::kOptimized;
      s.nu = c.support_x + L + 1;
      s.rows = c.support_x;
      s.row_of_x = c.x_rank;
      *extended = L > 1;
      break;
  }
  if (s.decoder == DecoderMode::kOptimized) {
    s.nu = std::max(s.nu, c.nxhat);
    if (options.aux_cardinality) s.nu = std::max<std::size_t>(2, *options.aux_cardinality);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Finalization into the public solution type.

std::string unique_axis_name(const SourceSpec& spec, std::string base) {
  while (spec.joint.layout().has_axis(base)) base += "_aux";
  return base;
}

AuxChannelSolution finalize(const SourceSpec& spec, const Compiled& c,
                            const Shape& shape, const std::vector<double>& ch,
                            const Evaluation& eval, SolveStats stats) {
  std::vector<std::string> symbols;
  for (std::size_t u = 0; u < shape.nu; ++u) symbols.push_back(std::to_string(u));
  Alphabet aux(unique_axis_name(spec, "u"), std::move(symbols));

  std::vector<Alphabet> input_axes(spec.joint.axes().begin(),
                                   spec.joint.axes().begin() +
                                       static_cast<std::ptrdiff_t>(spec.roles.all.size()));
  std::vector<double> kernel(c.nx * shape.nu, 0.0);
  for (std::size_t x = 0; x < c.nx; ++x) {
    const std::size_t r = shape.row_of_x[x];
    if (r == Compiled::npos) {
      kernel[x * shape.nu] = 1.0;
    } else {
      for (std::size_t u = 0; u < shape.nu; ++u) {
        kernel[x * shape.nu + u] = ch[r * shape.nu + u];
      }
    }
  }

  AuxChannelSolution sol{
      aux,
      Channel(input_axes, {aux}, std::move(kernel), 1e-9),
      eval.decoder,
      spec.reconstruction,
      eval.rate,
      eval.equivocation,
      eval.distortion,
      std::move(stats)};
  return sol;
}

struct SolveOutcome {
  Candidate candidate;
  SolveStats stats;
};

// Multi-start driver shared by the gamma and rate solvers.
SolveOutcome run_solver(const Compiled& c, const Shape& shape,
                        Objective objective, std::span<const double> D,
                        std::optional<double> E, const SolveOptions& options,
                        std::span<const std::vector<double>> carried,
                        bool extended, ModelCase mode) {
  AlProblem prob{c,
                 shape,
                 objective,
                 std::vector<double>(D.begin(), D.end()),
                 E,
                 options.max_outer,
                 options.max_inner};
  auto inits = build_inits(c, shape, D, options, carried, options.rd);

  std::vector<Candidate> results(inits.size());
  parallel_for(options.exec, inits.size(), [&](std::size_t i) {
    // Raw starting point as its own candidate (exact corners matter).
    Evaluator eval(c, shape);
    std::vector<double> dec_weights(D.size(), 1.0);
    Candidate raw;
    raw.order = i;
    raw.eval = eval.evaluate(inits[i], dec_weights);
    raw.feasible = is_feasible(raw.eval, D, E);
    raw.channel = inits[i];

    Candidate opt =
        optimize_from(prob, smooth(inits[i], shape.rows, shape.nu), i);
    if (raw.feasible &&
        (!opt.feasible ||
         (objective == Objective::kMinRate ? raw.eval.rate <= opt.eval.rate
                                           : raw.eval.equivocation >=
                                                 opt.eval.equivocation))) {
      opt.channel = raw.channel;
      opt.eval = raw.eval;
      opt.feasible = true;
    }
    results[i] = std::move(opt);
  });

  SolveOutcome out;
  out.stats.dispatched = mode;
  out.stats.aux_cardinality = shape.nu;
  out.stats.caratheodory_extended = extended;
  out.stats.restarts_used = static_cast<int>(inits.size());
  for (const auto& r : results) out.stats.inner_iterations += r.iterations;

  bool found = false;
  for (const auto& r : results) {
    if (!r.feasible) continue;
    if (!found) {
      out.candidate = r;
      found = true;
      continue;
    }
    const bool improves = objective == Objective::kMinRate
                              ? r.eval.rate < out.candidate.eval.rate
                              : r.eval.equivocation >
                                    out.candidate.eval.equivocation;
    if (improves) out.candidate = r;
  }
  if (!found) {
    throw InfeasibleDistortionError(
        "no channel satisfied all constraints simultaneously");
  }
  for (std::size_t l = 0; l < D.size(); ++l) {
    out.stats.max_distortion_slack =
        std::max(out.stats.max_distortion_slack,
                 out.candidate.eval.distortion[l] - D[l]);
  }
  if (E) {
    out.stats.equivocation_slack = *E - out.candidate.eval.equivocation;
  }
  return out;
}

// Census fast path: Γ(D) = H(X) - R(D) with the R(D) test channel.
SolveOutcome census_solve(const Compiled& c, const Shape& shape,
                          std::span<const double> D,
                          const SolveOptions& options) {
  auto ba = detail::ba_rate_distortion(c.px, c.d[0], D[0], options.rd);
  // Compress to support rows.
  std::vector<double> ch(shape.rows * shape.nu, 0.0);
  for (std::size_t x = 0; x < c.nx; ++x) {
    const std::size_t r = shape.row_of_x[x];
    if (r == Compiled::npos) continue;
    for (std::size_t u = 0; u < shape.nu; ++u) {
      ch[r * shape.nu + u] = ba.channel[x * shape.nu + u];
    }
  }
  Evaluator eval(c, shape);
  SolveOutcome out;
  out.candidate.channel = ch;
  out.candidate.eval = eval.evaluate(ch, std::vector<double>(c.d.size(), 1.0));
  out.candidate.feasible = true;
  out.stats.dispatched = ModelCase::kCensusK1;
  out.stats.aux_cardinality = shape.nu;
  out.stats.restarts_used = 0;
  out.stats.max_distortion_slack = out.candidate.eval.distortion[0] - D[0];
  return out;
}

}  // namespace

const char* to_string(ModelCase c) {
  switch (c) {
    case ModelCase::kCensusK1:
      return "census-K1";
    case ModelCase::kNoSideInfo:
      return "no-side-info";
    case ModelCase::kWynerZivMarkov:
      return "wyner-ziv-markov";
    case ModelCase::kGeneral:
      return "general";
  }
  return "general";
}

ModelCase dispatch_special_case(const SourceSpec& spec) {
  const bool z_const =
      !spec.has_side_info() || spec.joint.axes().back().size() == 1;

  auto same_set = [](std::vector<std::string> a, std::vector<std::string> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
  };
  if (z_const) {
    if (spec.utility.constraints.size() == 1 &&
        same_set(spec.roles.public_set, spec.roles.all) &&
        same_set(spec.roles.private_set, spec.roles.all)) {
      return ModelCase::kCensusK1;
    }
    return ModelCase::kNoSideInfo;
  }

  // Hidden-only-through-revealed test: I(X_h \ X_r ; Z | X_r) == 0.
  std::vector<std::string> hidden_only;
  for (const auto& n : spec.roles.private_set) {
    if (!spec.roles.is_public(n)) hidden_only.push_back(n);
  }
  if (hidden_only.empty()) return ModelCase::kWynerZivMarkov;
  std::vector<std::string> given = spec.roles.public_set;
  std::vector<std::string> given_z = given;
  given_z.push_back(spec.side_info_axis);
  const double cmi = conditional_entropy(spec.joint, hidden_only, given) -
                     conditional_entropy(spec.joint, hidden_only, given_z);
  if (std::abs(cmi) <= 1e-9) return ModelCase::kWynerZivMarkov;
  return ModelCase::kGeneral;
}

Reevaluation reevaluate(const SourceSpec& spec, const AuxChannelSolution& s) {
  Compiled c = compile(spec);
  Shape shape;
  shape.nu = s.aux_alphabet.size();
  shape.rows = c.nx;
  shape.row_of_x.resize(c.nx);
  std::iota(shape.row_of_x.begin(), shape.row_of_x.end(), 0);
  shape.decoder = DecoderMode::kOptimized;

  Evaluator eval(c, shape);
  Evaluation e = eval.evaluate_with_decoder(
      std::vector<double>(s.channel.raw().begin(), s.channel.raw().end()),
      s.decoder);
  return Reevaluation{e.rate, e.equivocation, e.distortion};
}

namespace {

struct PreparedSolve {
  Compiled compiled;
  ModelCase mode;
  Shape shape;
  bool extended = false;
};

PreparedSolve prepare(const SourceSpec& spec, std::span<const double> D,
                      const SolveOptions& options) {
  PreparedSolve p{compile(spec), ModelCase::kGeneral, {}, false};
  check_distortion_vector(p.compiled, D);
  p.mode = options.force_general ? ModelCase::kGeneral
                                 : dispatch_special_case(spec);
  p.shape = make_shape(p.compiled, p.mode, options,
                       spec.utility.constraints.size(), &p.extended);
  return p;
}

SolveOutcome solve_gamma(const PreparedSolve& p, std::span<const double> D,
                         const SolveOptions& options,
                         std::span<const std::vector<double>> carried) {
  if (p.mode == ModelCase::kCensusK1) {
    return census_solve(p.compiled, p.shape, D, options);
  }
  return run_solver(p.compiled, p.shape, Objective::kMaxEquivocation, D,
                    std::nullopt, options, carried, p.extended, p.mode);
}

SolveOutcome solve_rate(const PreparedSolve& p, std::span<const double> D,
                        double E, const SolveOptions& options,
                        std::span<const std::vector<double>> carried,
                        double* gamma_out) {
  SolveOutcome gamma = solve_gamma(p, D, options, carried);
  *gamma_out = gamma.candidate.eval.equivocation;
  if (E > *gamma_out + kEquivocationSlack) {
    throw InfeasiblePrivacyError(
        "equivocation bound " + std::to_string(E) +
        " exceeds the maximum achievable " + std::to_string(*gamma_out));
  }
  if (p.mode == ModelCase::kCensusK1) {
    SolveOutcome out = gamma;
    out.stats.equivocation_slack = E - out.candidate.eval.equivocation;
    return out;
  }
  std::vector<std::vector<double>> with_gamma(carried.begin(), carried.end());
  with_gamma.push_back(gamma.candidate.channel);
  return run_solver(p.compiled, p.shape, Objective::kMinRate, D, E, options,
                    with_gamma, p.extended, p.mode);
}

}  // namespace

GammaResult gamma_of_d(const SourceSpec& spec, std::span<const double> D,
                       const SolveOptions& options) {
  PreparedSolve p = prepare(spec, D, options);
  SolveOutcome out = solve_gamma(p, D, options, {});
  AuxChannelSolution sol = finalize(spec, p.compiled, p.shape,
                                    out.candidate.channel, out.candidate.eval,
                                    out.stats);
  return GammaResult{sol.equivocation, std::move(sol)};
}

RateResult rate_de(const SourceSpec& spec, std::span<const double> D, double E,
                   const SolveOptions& options) {
  if (!(E >= 0.0) || !std::isfinite(E)) {
    throw ValidationError("equivocation bound E must be finite and >= 0");
  }
  PreparedSolve p = prepare(spec, D, options);
  double gamma = 0.0;
  SolveOutcome out = solve_rate(p, D, E, options, {}, &gamma);
  AuxChannelSolution sol = finalize(spec, p.compiled, p.shape,
                                    out.candidate.channel, out.candidate.eval,
                                    out.stats);
  return RateResult{sol.rate, gamma, std::move(sol)};
}

std::vector<TradeoffPoint> tradeoff_region(
    const SourceSpec& spec, std::span<const std::vector<double>> d_grid,
    std::span<const double> e_grid, const SolveOptions& options) {
  if (d_grid.empty() || e_grid.empty()) {
    throw ValidationError("tradeoff grids must be nonempty");
  }
  const std::size_t nd = d_grid.size(), ne = e_grid.size();
  std::vector<TradeoffPoint> points(nd * ne);

  Compiled compiled = compile(spec);
  const ModelCase mode = options.force_general
                             ? ModelCase::kGeneral
                             : dispatch_special_case(spec);
  bool extended = false;
  Shape shape = make_shape(compiled, mode, options,
                           spec.utility.constraints.size(), &extended);
  PreparedSolve p{std::move(compiled), mode, std::move(shape), extended};

  // Gamma per distortion vector, sweeping in grid order so each solve can
  // reuse the previous solution (Γ is then non-decreasing by construction
  // on ascending grids).
  std::vector<std::optional<SolveOutcome>> gammas(nd);
  std::vector<std::vector<double>> carried;
  for (std::size_t i = 0; i < nd; ++i) {
    try {
      check_distortion_vector(p.compiled, d_grid[i]);
      gammas[i] = solve_gamma(p, d_grid[i], options, carried);
      carried.assign(1, gammas[i]->candidate.channel);
    } catch (const InfeasibleError&) {
      gammas[i] = std::nullopt;
      carried.clear();
    }
  }

  // Rate solves; processed with D ascending and E descending so neighbor
  // solutions (feasible at the successor point by monotonicity of the
  // constraint sets) can be offered as candidates.
  std::vector<std::size_t> e_order(ne);
  std::iota(e_order.begin(), e_order.end(), 0);
  std::sort(e_order.begin(), e_order.end(), [&](std::size_t a, std::size_t b) {
    return e_grid[a] > e_grid[b];
  });

  std::vector<std::optional<SolveOutcome>> solved(nd * ne);
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t jo = 0; jo < ne; ++jo) {
      const std::size_t j = e_order[jo];
      const std::size_t idx = i * ne + j;
      TradeoffPoint& pt = points[idx];
      pt.D = d_grid[i];
      pt.E = e_grid[j];
      if (!gammas[i]) continue;  // infeasible distortion: flagged
      pt.gamma = gammas[i]->candidate.eval.equivocation;
      if (pt.E > pt.gamma + kEquivocationSlack) continue;

      std::vector<std::vector<double>> inits;
      inits.push_back(gammas[i]->candidate.channel);
      if (i > 0 && solved[(i - 1) * ne + j]) {
        inits.push_back(solved[(i - 1) * ne + j]->candidate.channel);
      }
      if (jo > 0 && solved[i * ne + e_order[jo - 1]]) {
        inits.push_back(solved[i * ne + e_order[jo - 1]]->candidate.channel);
      }
      try {
        SolveOutcome out =
            p.mode == ModelCase::kCensusK1
                ? census_solve(p.compiled, p.shape, d_grid[i], options)
                : run_solver(p.compiled, p.shape, Objective::kMinRate,
                             d_grid[i], pt.E, options, inits, p.extended,
                             p.mode);
        pt.feasible = true;
        pt.rate = out.candidate.eval.rate;
        pt.solution = finalize(spec, p.compiled, p.shape,
                               out.candidate.channel, out.candidate.eval,
                               out.stats);
        solved[idx] = std::move(out);
      } catch (const InfeasibleError&) {
        // leave flagged infeasible
      }
    }
  }
  return points;
}

// ---------------------------------------------------------------------------
// Brute-force oracle over quantized channels.

namespace {

// All length-n compositions of q (vectors of nonnegative ints summing to q),
// in lexicographic order.
std::vector<std::vector<int>> compositions(int q, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  // Recursive walk without recursion: odometer over the first n-1 digits.
  std::function<void(int, int)> rec = [&](int pos, int rest) {
    if (pos == n - 1) {
      cur[pos] = rest;
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= rest; ++v) {
      cur[pos] = v;
      rec(pos + 1, rest - v);
    }
  };
  rec(0, q);
  return out;
}

bool non_increasing(const std::vector<int>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) return false;
  }
  return true;
}

}  // namespace

double brute_force_rde(const SourceSpec& spec, std::span<const double> D,
                       double E, int q, const SolveOptions& options) {
  Compiled c = compile(spec);
  check_distortion_vector(c, D);
  if (q < 1 || q > 32) {
    throw SizeError("quantization level q must be in [1, 32]");
  }
  if (c.support_x > 4) {
    throw SizeError("brute force supports at most 4 source cells with mass; this model has " +
                    std::to_string(c.support_x));
  }
  bool extended = false;
  Shape shape = make_shape(c, ModelCase::kGeneral, options,
                           spec.utility.constraints.size(), &extended);
  if (shape.nu > 4) {
    throw SizeError("brute force supports |U| <= 4, requested " +
                    std::to_string(shape.nu));
  }

  const auto comps = compositions(q, static_cast<int>(shape.nu));
  std::vector<std::size_t> canonical;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (non_increasing(comps[i])) canonical.push_back(i);
  }
  const std::size_t rows = shape.rows;
  // The objective is invariant under relabelings of U, so the first row can
  // be restricted to sorted compositions.
  double work = static_cast<double>(canonical.size());
  for (std::size_t r = 1; r < rows; ++r) {
    work *= static_cast<double>(comps.size());
  }
  if (work > 3e8) {
    throw SizeError("brute-force search space is too large (" +
                    std::to_string(work) + " channels)");
  }

  const std::size_t tail = rows > 0 ? rows - 1 : 0;
  std::size_t tail_count = 1;
  for (std::size_t r = 0; r < tail; ++r) tail_count *= comps.size();

  std::vector<double> best_per_first(canonical.size(),
                                     std::numeric_limits<double>::infinity());
  const double inv_q = 1.0 / static_cast<double>(q);
  std::vector<double> dvec(D.begin(), D.end());

  parallel_for(options.exec, canonical.size(), [&](std::size_t ci) {
    Evaluator eval(c, shape);
    std::vector<double> ch(rows * shape.nu, 0.0);
    std::vector<double> dec_weights(c.d.size());
    for (std::size_t l = 0; l < c.d.size(); ++l) {
      dec_weights[l] = 1.0 / std::max(dvec[l], 1e-9);
    }
    const auto& first = comps[canonical[ci]];
    for (std::size_t u = 0; u < shape.nu; ++u) {
      ch[u] = first[u] * inv_q;
    }
    double local = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < tail_count; ++t) {
      std::size_t rem = t;
      for (std::size_t r = 1; r < rows; ++r) {
        const auto& comp = comps[rem % comps.size()];
        rem /= comps.size();
        for (std::size_t u = 0; u < shape.nu; ++u) {
          ch[r * shape.nu + u] = comp[u] * inv_q;
        }
      }
      Evaluation e = eval.evaluate(ch, dec_weights);
      bool ok = e.equivocation >= E - 1e-9;
      for (std::size_t l = 0; ok && l < dvec.size(); ++l) {
        ok = e.distortion[l] <= dvec[l] + 1e-9;
      }
      if (ok && e.rate < local) local = e.rate;
    }
    best_per_first[ci] = local;
  });

  double best = std::numeric_limits<double>::infinity();
  for (double v : best_per_first) best = std::min(best, v);
  if (!std::isfinite(best)) {
    throw InfeasibleError(
        "no channel on the 1/" + std::to_string(q) +
        " grid satisfies the distortion and equivocation bounds");
  }
  return best;
}

}  // namespace rdeq
