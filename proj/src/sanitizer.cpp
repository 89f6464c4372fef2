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

#include "rdeq/sanitizer.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "rdeq/distortion.hpp"
#include "rdeq/rng.hpp"

namespace rdeq {

namespace {

using Json = nlohmann::ordered_json;

// Positions of `axes` (by name) inside a database schema; error when a
// needed column is missing or its alphabet differs.
std::vector<std::size_t> schema_positions(const Database& db,
                                          std::span<const Alphabet> axes) {
  std::vector<std::size_t> out;
  for (const auto& axis : axes) {
    bool found = false;
    for (std::size_t c = 0; c < db.schema.size(); ++c) {
      if (db.schema[c].name() == axis.name()) {
        if (!(db.schema[c] == axis)) {
          throw SchemaError("database column '" + axis.name() +
                            "' has a different alphabet than the model");
        }
        out.push_back(c);
        found = true;
        break;
      }
    }
    if (!found) {
      throw SchemaError("database is missing column '" + axis.name() + "'");
    }
  }
  return out;
}

}  // namespace

SanitizationPlan synthesize_channel(const SourceSpec& spec,
                                    std::span<const double> D, double E,
                                    const SolveOptions& options) {
  RateResult solved = rate_de(spec, D, E, options);
  const AuxChannelSolution& sol = solved.solution;

  // Encoded-attribute axes in role order.
  std::vector<Alphabet> enc_axes;
  std::vector<std::size_t> enc_pos;
  for (std::size_t i = 0; i < spec.roles.all.size(); ++i) {
    if (spec.roles.is_encoded(spec.roles.all[i])) {
      enc_axes.push_back(spec.joint.axes()[i]);
      enc_pos.push_back(i);
    }
  }
  AxisLayout enc_layout(enc_axes);
  const std::size_t n_enc = enc_layout.cell_count();

  const auto& layout = spec.joint.layout();
  const std::size_t nz =
      spec.has_side_info() ? layout.axes().back().size() : 1;
  const std::size_t nx = spec.joint.cell_count() / nz;
  const std::size_t nu = sol.aux_alphabet.size();
  AxisLayout recon_layout(spec.reconstruction);
  const std::size_t nxhat = recon_layout.cell_count();

  // p(x̂ | x_enc) = sum_{x,z,u} p(x,z | x_enc) p(u|x) [g(u,z) = x̂].
  std::vector<std::size_t> enc_of_x(nx);
  std::vector<std::size_t> digits(enc_pos.size());
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t k = 0; k < enc_pos.size(); ++k) {
      digits[k] = layout.digit(x * nz, enc_pos[k]);
    }
    enc_of_x[x] = enc_layout.flatten(digits);
  }

  std::vector<double> kernel(n_enc * nxhat, 0.0);
  std::vector<double> enc_mass(n_enc, 0.0);
  bool projected = false;
  for (std::size_t x = 0; x < nx; ++x) {
    const std::size_t e = enc_of_x[x];
    for (std::size_t z = 0; z < nz; ++z) {
      const double w = spec.joint.mass(x * nz + z);
      if (w <= 0.0) continue;
      enc_mass[e] += w;
      for (std::size_t u = 0; u < nu; ++u) {
        const double p = sol.channel.prob(x, u);
        if (p <= 0.0) continue;
        kernel[e * nxhat + sol.decoder[u * nz + z]] += w * p;
      }
    }
  }
  // Detect whether the solved channel actually varied within an encoded
  // cell (then the published channel is a projection).
  for (std::size_t e = 0; e < n_enc && !projected; ++e) {
    std::size_t first = nx;
    for (std::size_t x = 0; x < nx; ++x) {
      if (enc_of_x[x] != e) continue;
      bool has_mass = false;
      for (std::size_t z = 0; z < nz; ++z) {
        if (spec.joint.mass(x * nz + z) > 0.0) has_mass = true;
      }
      if (!has_mass) continue;
      if (first == nx) {
        first = x;
        continue;
      }
      for (std::size_t u = 0; u < nu; ++u) {
        if (std::abs(sol.channel.prob(x, u) - sol.channel.prob(first, u)) >
            1e-12) {
          projected = true;
          break;
        }
      }
      if (projected) break;
    }
  }

  for (std::size_t e = 0; e < n_enc; ++e) {
    if (enc_mass[e] > 0.0) {
      for (std::size_t y = 0; y < nxhat; ++y) {
        kernel[e * nxhat + y] /= enc_mass[e];
      }
    } else {
      // Encoded tuples outside the model support: deterministic first cell.
      kernel[e * nxhat] = 1.0;
    }
  }

  SanitizationPlan plan;
  plan.operating_point =
      TradeoffPoint{std::vector<double>(D.begin(), D.end()), E, solved.rate,
                    solved.gamma, true, solved.solution};
  plan.channel = Channel(std::move(enc_axes), spec.reconstruction,
                         std::move(kernel), 1e-9);
  plan.seed = options.seed;
  plan.projected = projected;
  return plan;
}

Database sanitize(const Database& db, const SanitizationPlan& plan,
                  const ExecPolicy& policy) {
  const auto& in_axes = plan.channel.input().axes();
  const auto positions = schema_positions(db, in_axes);

  const std::size_t n_out = plan.channel.output_count();
  const auto& out_layout = plan.channel.output();

  Database out;
  out.schema = out_layout.axes();
  out.rows.assign(db.row_count(),
                  std::vector<std::uint32_t>(out_layout.rank(), 0));

  parallel_for(policy, db.row_count(), [&](std::size_t i) {
    std::vector<std::size_t> digits(in_axes.size());
    for (std::size_t k = 0; k < positions.size(); ++k) {
      digits[k] = db.rows[i][positions[k]];
    }
    const std::size_t in_flat = plan.channel.input().flatten(digits);

    // One categorical draw per row from its keyed substream.
    SplitMix64 rng = substream(plan.seed, i);
    const double u = rng.next_unit();
    double cum = 0.0;
    std::size_t pick = n_out - 1;
    for (std::size_t y = 0; y < n_out; ++y) {
      cum += plan.channel.prob(in_flat, y);
      if (u < cum) {
        pick = y;
        break;
      }
    }
    std::vector<std::size_t> out_digits(out_layout.rank());
    out_layout.unflatten(pick, out_digits);
    for (std::size_t k = 0; k < out_digits.size(); ++k) {
      out.rows[i][k] = static_cast<std::uint32_t>(out_digits[k]);
    }
  });
  return out;
}

AuditReport audit(const Database& db, const Database& sdb,
                  const SourceSpec& spec, const SanitizationPlan& plan,
                  const ExecPolicy& policy) {
  if (db.row_count() != sdb.row_count()) {
    throw ValidationError("original and sanitized databases have different "
                          "row counts");
  }

  // Public attribute columns in the original, reconstruction columns in
  // the sanitized database.
  std::vector<Alphabet> pub_axes;
  for (std::size_t p : spec.public_positions()) {
    pub_axes.push_back(spec.joint.axes()[p]);
  }
  const auto pub_cols = schema_positions(db, pub_axes);
  const auto rec_cols = schema_positions(sdb, spec.reconstruction);
  AxisLayout pub_layout(pub_axes);
  AxisLayout rec_layout(spec.reconstruction);

  AuditReport report;
  report.rows = db.row_count();
  report.target_equivocation = spec.privacy.equivocation_bound;

  const std::size_t L = spec.utility.constraints.size();
  for (std::size_t l = 0; l < L; ++l) {
    DistortionMatrix d = effective_distortion(spec, l);
    const double total = deterministic_sum(
        policy, db.row_count(), [&, dm = std::move(d)](std::size_t i) {
          std::vector<std::size_t> dg(pub_cols.size());
          for (std::size_t k = 0; k < pub_cols.size(); ++k) {
            dg[k] = db.rows[i][pub_cols[k]];
          }
          std::vector<std::size_t> rg(rec_cols.size());
          for (std::size_t k = 0; k < rec_cols.size(); ++k) {
            rg[k] = sdb.rows[i][rec_cols[k]];
          }
          return dm.at(pub_layout.flatten(dg), rec_layout.flatten(rg));
        });
    report.empirical_distortion.push_back(
        total / static_cast<double>(db.row_count()));
    report.target_distortion.push_back(spec.utility.constraints[l].bound);
  }

  // Model equivocation H(X_h | X̂_r, Z) from the spec joint composed with
  // the plan channel.
  const auto& layout = spec.joint.layout();
  const std::size_t nz =
      spec.has_side_info() ? layout.axes().back().size() : 1;
  const std::size_t nx = spec.joint.cell_count() / nz;
  auto priv_pos = spec.private_positions();
  std::vector<std::size_t> priv_sizes;
  for (std::size_t p : priv_pos) priv_sizes.push_back(layout.axes()[p].size());
  std::size_t nxh = 1;
  for (std::size_t s : priv_sizes) nxh *= s;

  std::vector<std::size_t> enc_pos;
  for (std::size_t i = 0; i < spec.roles.all.size(); ++i) {
    if (spec.roles.is_encoded(spec.roles.all[i])) enc_pos.push_back(i);
  }
  AxisLayout enc_layout(plan.channel.input().axes());

  const std::size_t nxhat = plan.channel.output_count();
  std::vector<double> joint_hxz(nxh * nxhat * nz, 0.0);
  std::vector<std::size_t> edigits(enc_pos.size());
  for (std::size_t x = 0; x < nx; ++x) {
    std::size_t xh = 0;
    for (std::size_t k = 0; k < priv_pos.size(); ++k) {
      xh = xh * priv_sizes[k] + layout.digit(x * nz, priv_pos[k]);
    }
    for (std::size_t k = 0; k < enc_pos.size(); ++k) {
      edigits[k] = layout.digit(x * nz, enc_pos[k]);
    }
    const std::size_t e = enc_layout.flatten(edigits);
    for (std::size_t z = 0; z < nz; ++z) {
      const double w = spec.joint.mass(x * nz + z);
      if (w <= 0.0) continue;
      for (std::size_t y = 0; y < nxhat; ++y) {
        joint_hxz[(xh * nxhat + y) * nz + z] += w * plan.channel.prob(e, y);
      }
    }
  }
  double h = 0.0;
  for (std::size_t y = 0; y < nxhat; ++y) {
    for (std::size_t z = 0; z < nz; ++z) {
      double b = 0.0;
      for (std::size_t xh = 0; xh < nxh; ++xh) {
        b += joint_hxz[(xh * nxhat + y) * nz + z];
      }
      if (b <= 0.0) continue;
      for (std::size_t xh = 0; xh < nxh; ++xh) {
        const double a = joint_hxz[(xh * nxhat + y) * nz + z];
        if (a > 0.0) h -= a * std::log2(a / b);
      }
    }
  }
  report.equivocation = std::max(0.0, h);
  return report;
}

namespace {

Json alphabet_json(const Alphabet& a) {
  return Json{{"name", a.name()}, {"symbols", a.symbols()}};
}

Alphabet alphabet_from(const Json& j) {
  std::vector<std::string> symbols;
  for (const auto& s : j.at("symbols")) symbols.push_back(s.get<std::string>());
  return Alphabet(j.at("name").get<std::string>(), std::move(symbols));
}

}  // namespace

std::string save_plan(const SanitizationPlan& plan) {
  Json doc;
  doc["seed"] = plan.seed;
  doc["operating_point"] = {{"D", plan.operating_point.D},
                            {"E", plan.operating_point.E},
                            {"rate", plan.operating_point.rate},
                            {"gamma", plan.operating_point.gamma},
                            {"feasible", plan.operating_point.feasible}};
  Json in = Json::array(), out = Json::array();
  for (const auto& a : plan.channel.input().axes()) in.push_back(alphabet_json(a));
  for (const auto& a : plan.channel.output().axes()) out.push_back(alphabet_json(a));
  doc["channel"] = {
      {"input_axes", std::move(in)},
      {"output_axes", std::move(out)},
      {"kernel", std::vector<double>(plan.channel.raw().begin(),
                                     plan.channel.raw().end())}};
  doc["projected"] = plan.projected;
  return doc.dump(2) + "\n";
}

SanitizationPlan load_plan(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("plan document is not valid JSON: ") +
                          e.what());
  }
  SanitizationPlan plan;
  plan.seed = doc.at("seed").get<std::uint64_t>();
  const auto& op = doc.at("operating_point");
  plan.operating_point.D = op.at("D").get<std::vector<double>>();
  plan.operating_point.E = op.at("E").get<double>();
  plan.operating_point.rate = op.at("rate").get<double>();
  plan.operating_point.gamma = op.at("gamma").get<double>();
  plan.operating_point.feasible = op.at("feasible").get<bool>();
  std::vector<Alphabet> in_axes, out_axes;
  for (const auto& a : doc.at("channel").at("input_axes")) {
    in_axes.push_back(alphabet_from(a));
  }
  for (const auto& a : doc.at("channel").at("output_axes")) {
    out_axes.push_back(alphabet_from(a));
  }
  auto kernel = doc.at("channel").at("kernel").get<std::vector<double>>();
  plan.channel = Channel(std::move(in_axes), std::move(out_axes),
                         std::move(kernel), 1e-9);
  plan.projected = doc.value("projected", false);
  return plan;
}

}  // namespace rdeq
