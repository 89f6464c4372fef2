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

#include "rdeq/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace rdeq {

namespace {

void check_axis_names_unique(const std::vector<Alphabet>& axes) {
  std::unordered_set<std::string> seen;
  for (const auto& a : axes) {
    if (!seen.insert(a.name()).second) {
      throw AxisError("duplicate axis name '" + a.name() + "'");
    }
  }
}

double normalize_or_throw(std::vector<double>& mass, double tolerance,
                          const char* what) {
  double total = 0.0;
  for (double v : mass) {
    if (!std::isfinite(v)) {
      throw ValidationError(std::string(what) + ": non-finite mass entry");
    }
    if (v < 0.0) {
      throw ValidationError(std::string(what) + ": negative mass entry");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > tolerance) {
    throw ValidationError(std::string(what) + ": total mass " +
                          std::to_string(total) + " is not 1 within tolerance");
  }
  for (double& v : mass) v /= total;
  return total;
}

}  // namespace

Alphabet::Alphabet(std::string name, std::vector<std::string> symbols)
    : name_(std::move(name)), symbols_(std::move(symbols)) {
  if (name_.empty()) throw ValidationError("alphabet name must be nonempty");
  if (symbols_.empty()) {
    throw ValidationError("alphabet '" + name_ + "' must have >= 1 symbol");
  }
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const std::string& s = symbols_[i];
    // Symbols travel through one-symbol-per-cell CSV documents.
    if (s.find_first_of(",\n\r") != std::string::npos) {
      throw ValidationError("alphabet '" + name_ +
                            "': symbol contains a comma or line break");
    }
    if (!index_.emplace(s, i).second) {
      throw ValidationError("alphabet '" + name_ + "': duplicate symbol '" +
                            s + "'");
    }
  }
}

std::optional<std::size_t> Alphabet::index_of(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Alphabet::require(std::string_view symbol) const {
  auto idx = index_of(symbol);
  if (!idx) {
    throw ValidationError("symbol '" + std::string(symbol) +
                          "' is not in alphabet '" + name_ + "'");
  }
  return *idx;
}

AxisLayout::AxisLayout(std::vector<Alphabet> axes) : axes_(std::move(axes)) {
  check_axis_names_unique(axes_);
  strides_.assign(axes_.size(), 1);
  for (std::size_t i = axes_.size(); i-- > 0;) {
    strides_[i] = cells_;
    cells_ *= axes_[i].size();
  }
}

std::size_t AxisLayout::axis_index(std::string_view name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].name() == name) return i;
  }
  throw AxisError("unknown axis '" + std::string(name) + "'");
}

bool AxisLayout::has_axis(std::string_view name) const {
  for (const auto& a : axes_) {
    if (a.name() == name) return true;
  }
  return false;
}

std::size_t AxisLayout::flatten(std::span<const std::size_t> digits) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    flat += digits[i] * strides_[i];
  }
  return flat;
}

void AxisLayout::unflatten(std::size_t flat,
                           std::span<std::size_t> digits) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    digits[i] = (flat / strides_[i]) % axes_[i].size();
  }
}

std::size_t AxisLayout::digit(std::size_t flat, std::size_t axis) const {
  return (flat / strides_[axis]) % axes_[axis].size();
}

std::vector<std::size_t> AxisLayout::resolve(
    std::span<const std::string> names) const {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  std::unordered_set<std::size_t> seen;
  for (const auto& n : names) {
    std::size_t idx = axis_index(n);
    if (!seen.insert(idx).second) {
      throw AxisError("axis '" + n + "' listed twice");
    }
    out.push_back(idx);
  }
  return out;
}

JointPmf::JointPmf(std::vector<Alphabet> axes, std::vector<double> mass,
                   double mass_tolerance)
    : layout_(std::move(axes)), mass_(std::move(mass)) {
  if (mass_.size() != layout_.cell_count()) {
    throw ValidationError("pmf has " + std::to_string(mass_.size()) +
                          " values but the axis product has " +
                          std::to_string(layout_.cell_count()) + " cells");
  }
  normalize_or_throw(mass_, mass_tolerance, "pmf");
}

JointPmf JointPmf::uniform(std::vector<Alphabet> axes) {
  AxisLayout layout(axes);
  std::vector<double> mass(layout.cell_count(),
                           1.0 / static_cast<double>(layout.cell_count()));
  return JointPmf(std::move(axes), std::move(mass));
}

JointPmf JointPmf::point_mass(std::vector<Alphabet> axes,
                              std::span<const std::size_t> cell) {
  AxisLayout layout(axes);
  std::vector<double> mass(layout.cell_count(), 0.0);
  mass[layout.flatten(cell)] = 1.0;
  return JointPmf(std::move(axes), std::move(mass));
}

JointPmf JointPmf::marginal(std::span<const std::string> keep) const {
  return marginalize(*this, keep);
}

Channel::Channel(std::vector<Alphabet> input_axes,
                 std::vector<Alphabet> output_axes, std::vector<double> kernel,
                 double row_tolerance)
    : input_(std::move(input_axes)),
      output_(std::move(output_axes)),
      kernel_(std::move(kernel)) {
  const std::size_t rows = input_.cell_count();
  const std::size_t cols = output_.cell_count();
  if (kernel_.size() != rows * cols) {
    throw ValidationError("channel kernel size mismatch");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double v = kernel_[r * cols + c];
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("channel row " + std::to_string(r) +
                              " has a negative or non-finite entry");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > row_tolerance) {
      throw ValidationError("channel row " + std::to_string(r) + " sums to " +
                            std::to_string(total) + ", expected 1");
    }
    for (std::size_t c = 0; c < cols; ++c) kernel_[r * cols + c] /= total;
  }
}

Channel Channel::identity(const std::vector<Alphabet>& axes) {
  AxisLayout layout(axes);
  const std::size_t n = layout.cell_count();
  std::vector<double> kernel(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) kernel[i * n + i] = 1.0;
  return Channel(axes, axes, std::move(kernel));
}

Channel Channel::constant(const std::vector<Alphabet>& input_axes,
                          const std::vector<Alphabet>& output_axes,
                          std::size_t output_flat) {
  AxisLayout in(input_axes), out(output_axes);
  std::vector<double> kernel(in.cell_count() * out.cell_count(), 0.0);
  for (std::size_t r = 0; r < in.cell_count(); ++r) {
    kernel[r * out.cell_count() + output_flat] = 1.0;
  }
  return Channel(input_axes, output_axes, std::move(kernel));
}

double entropy(std::span<const double> mass) {
  double h = 0.0;
  for (double p : mass) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

double entropy(const JointPmf& p) { return entropy(p.raw()); }

double conditional_entropy(const JointPmf& p,
                           std::span<const std::string> target,
                           std::span<const std::string> given) {
  auto target_idx = p.layout().resolve(target);
  auto given_idx = p.layout().resolve(given);
  for (std::size_t t : target_idx) {
    if (std::find(given_idx.begin(), given_idx.end(), t) != given_idx.end()) {
      throw AxisError("target and given axis sets overlap");
    }
  }
  if (target.empty()) return 0.0;

  std::vector<std::string> both(target.begin(), target.end());
  both.insert(both.end(), given.begin(), given.end());
  double h_joint = entropy(marginalize(p, both));
  double h_given = given.empty() ? 0.0 : entropy(marginalize(p, given));
  double h = h_joint - h_given;
  return h < 0.0 ? 0.0 : h;
}

double mutual_information(const JointPmf& p, std::span<const std::string> left,
                          std::span<const std::string> right) {
  auto left_idx = p.layout().resolve(left);
  auto right_idx = p.layout().resolve(right);
  for (std::size_t l : left_idx) {
    if (std::find(right_idx.begin(), right_idx.end(), l) != right_idx.end()) {
      throw AxisError("left and right axis sets overlap");
    }
  }
  if (left.empty() || right.empty()) return 0.0;

  std::vector<std::string> both(left.begin(), left.end());
  both.insert(both.end(), right.begin(), right.end());
  double i = entropy(marginalize(p, left)) + entropy(marginalize(p, right)) -
             entropy(marginalize(p, both));
  return i < 0.0 ? 0.0 : i;
}

JointPmf marginalize(const JointPmf& p, std::span<const std::string> keep) {
  if (keep.empty()) throw AxisError("marginalize: keep set is empty");
  auto positions = p.layout().resolve(keep);
  // Preserve the original axis order.
  std::sort(positions.begin(), positions.end());

  std::vector<Alphabet> kept_axes;
  kept_axes.reserve(positions.size());
  for (std::size_t pos : positions) kept_axes.push_back(p.axes()[pos]);
  AxisLayout kept(kept_axes);

  std::vector<double> mass(kept.cell_count(), 0.0);
  const auto& layout = p.layout();
  for (std::size_t flat = 0; flat < p.cell_count(); ++flat) {
    std::size_t reduced = 0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
      reduced += layout.digit(flat, positions[k]) * kept.stride(k);
    }
    mass[reduced] += p.mass(flat);
  }
  return JointPmf(std::move(kept_axes), std::move(mass), kLoadMassTolerance);
}

JointPmf attach_channel(const JointPmf& prior, const Channel& ch) {
  const auto& in = ch.input();
  // Map channel input axes onto prior axis positions.
  std::vector<std::size_t> prior_pos;
  prior_pos.reserve(in.rank());
  for (const auto& axis : in.axes()) {
    std::size_t pos = prior.layout().axis_index(axis.name());
    if (!(prior.axes()[pos] == axis)) {
      throw AxisError("channel input axis '" + axis.name() +
                      "' does not match the prior's alphabet");
    }
    prior_pos.push_back(pos);
  }
  for (const auto& axis : ch.output().axes()) {
    if (prior.layout().has_axis(axis.name())) {
      throw AxisError("channel output axis '" + axis.name() +
                      "' collides with a prior axis");
    }
  }

  std::vector<Alphabet> joint_axes = prior.axes();
  joint_axes.insert(joint_axes.end(), ch.output().axes().begin(),
                    ch.output().axes().end());
  const std::size_t out_cells = ch.output_count();

  std::vector<double> mass(prior.cell_count() * out_cells, 0.0);
  std::vector<std::size_t> in_digits(in.rank());
  for (std::size_t flat = 0; flat < prior.cell_count(); ++flat) {
    const double px = prior.mass(flat);
    for (std::size_t k = 0; k < prior_pos.size(); ++k) {
      in_digits[k] = prior.layout().digit(flat, prior_pos[k]);
    }
    const std::size_t in_flat = in.flatten(in_digits);
    for (std::size_t y = 0; y < out_cells; ++y) {
      mass[flat * out_cells + y] = px * ch.prob(in_flat, y);
    }
  }
  return JointPmf(std::move(joint_axes), std::move(mass), kLoadMassTolerance);
}

}  // namespace rdeq
