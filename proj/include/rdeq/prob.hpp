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
// Exact finite-alphabet probability arithmetic over labeled dense tensors:
// joint pmfs, marginalization, channels, entropy, conditional entropy and
// mutual information. All information quantities are in bits.

#ifndef RDEQ_PROB_HPP_
#define RDEQ_PROB_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rdeq/errors.hpp"

namespace rdeq {

// Mass tolerance for programmatically constructed pmfs.
inline constexpr double kMassTolerance = 1e-9;
// Looser tolerance applied when ingesting text documents, where values
// have been through decimal rounding.
inline constexpr double kLoadMassTolerance = 1e-6;
// Per-row tolerance for conditional mass tensors.
inline constexpr double kRowSumTolerance = 1e-12;

// A named finite alphabet of distinct string symbols.
class Alphabet {
 public:
  Alphabet(std::string name, std::vector<std::string> symbols);

  const std::string& name() const { return name_; }
  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::string& symbol(std::size_t i) const { return symbols_.at(i); }
  std::optional<std::size_t> index_of(std::string_view symbol) const;
  // Like index_of but throws ValidationError when absent.
  std::size_t require(std::string_view symbol) const;

  bool operator==(const Alphabet& other) const {
    return name_ == other.name_ && symbols_ == other.symbols_;
  }

 private:
  std::string name_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Row-major addressing over a product of alphabets (last axis fastest).
class AxisLayout {
 public:
  AxisLayout() = default;
  explicit AxisLayout(std::vector<Alphabet> axes);

  const std::vector<Alphabet>& axes() const { return axes_; }
  std::size_t rank() const { return axes_.size(); }
  std::size_t cell_count() const { return cells_; }
  std::size_t stride(std::size_t axis) const { return strides_.at(axis); }

  std::size_t axis_index(std::string_view name) const;  // throws AxisError
  bool has_axis(std::string_view name) const;

  std::size_t flatten(std::span<const std::size_t> digits) const;
  void unflatten(std::size_t flat, std::span<std::size_t> digits) const;
  std::size_t digit(std::size_t flat, std::size_t axis) const;

  // Positions of the named axes; rejects unknown or duplicate names.
  std::vector<std::size_t> resolve(std::span<const std::string> names) const;

 private:
  std::vector<Alphabet> axes_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 1;
};

// Dense joint pmf over a product of labeled alphabets. Nonnegative mass,
// renormalized to total 1 exactly at construction.
class JointPmf {
 public:
  JointPmf(std::vector<Alphabet> axes, std::vector<double> mass,
           double mass_tolerance = kMassTolerance);

  static JointPmf uniform(std::vector<Alphabet> axes);
  static JointPmf point_mass(std::vector<Alphabet> axes,
                             std::span<const std::size_t> cell);

  const AxisLayout& layout() const { return layout_; }
  const std::vector<Alphabet>& axes() const { return layout_.axes(); }
  std::size_t cell_count() const { return layout_.cell_count(); }
  double mass(std::size_t flat) const { return mass_[flat]; }
  double mass_at(std::span<const std::size_t> digits) const {
    return mass_[layout_.flatten(digits)];
  }
  std::span<const double> raw() const { return mass_; }

  // Marginal over the named axes, preserving their original order.
  JointPmf marginal(std::span<const std::string> keep) const;

 private:
  JointPmf() = default;
  AxisLayout layout_;
  std::vector<double> mass_;
};

// Conditional mass tensor from one alphabet product to another. Every
// conditional slice is a probability vector.
class Channel {
 public:
  // Degenerate unit channel (rank-0 axes): placeholder for later assignment.
  Channel() : kernel_{1.0} {}
  Channel(std::vector<Alphabet> input_axes, std::vector<Alphabet> output_axes,
          std::vector<double> kernel, double row_tolerance = kRowSumTolerance);

  static Channel identity(const std::vector<Alphabet>& axes);
  // Point mass on a fixed output cell regardless of input.
  static Channel constant(const std::vector<Alphabet>& input_axes,
                          const std::vector<Alphabet>& output_axes,
                          std::size_t output_flat);

  const AxisLayout& input() const { return input_; }
  const AxisLayout& output() const { return output_; }
  std::size_t input_count() const { return input_.cell_count(); }
  std::size_t output_count() const { return output_.cell_count(); }
  double prob(std::size_t in_flat, std::size_t out_flat) const {
    return kernel_[in_flat * output_.cell_count() + out_flat];
  }
  std::span<const double> row(std::size_t in_flat) const {
    return {kernel_.data() + in_flat * output_.cell_count(),
            output_.cell_count()};
  }
  std::span<const double> raw() const { return kernel_; }

 private:
  AxisLayout input_;
  AxisLayout output_;
  std::vector<double> kernel_;
};

// Shannon entropy in bits, with the 0 log 0 = 0 convention.
double entropy(const JointPmf& p);
// Entropy of a raw nonnegative vector already summing to ~1.
double entropy(std::span<const double> mass);

// H(target | given); axes outside both sets are marginalized out first.
// Empty target yields 0; empty given yields H(target).
double conditional_entropy(const JointPmf& p,
                           std::span<const std::string> target,
                           std::span<const std::string> given);

// I(left; right) >= 0 for disjoint axis sets.
double mutual_information(const JointPmf& p, std::span<const std::string> left,
                          std::span<const std::string> right);

// Sums mass over dropped axes; keep must be a nonempty subset.
JointPmf marginalize(const JointPmf& p, std::span<const std::string> keep);

// Joint over prior.axes + ch.output_axes with mass p(x) * ch(y|x).
// Requires ch.input_axes to be a subset of prior.axes and output names not
// to collide with prior names.
JointPmf attach_channel(const JointPmf& prior, const Channel& ch);

}  // namespace rdeq

#endif  // RDEQ_PROB_HPP_
