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

#include "rdeq/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>

namespace rdeq {

namespace {

double numeric_label(const std::string& s, const std::string& alphabet) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ValidationError("symbol '" + s + "' of alphabet '" + alphabet +
                          "' is not numeric; squared distortion needs numeric labels");
  }
  return v;
}

// Key for a tuple of symbols across the public attributes.
std::string tuple_key(const std::vector<std::string>& symbols) {
  std::string key;
  for (const auto& s : symbols) {
    key.push_back('\x1f');
    key += s;
  }
  return key;
}

}  // namespace

DistortionMatrix::DistortionMatrix(std::size_t rows, std::size_t cols,
                                   std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0 || values_.size() != rows_ * cols_) {
    throw ValidationError("distortion matrix shape mismatch");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("distortion entries must be finite and >= 0");
    }
  }
}

DistortionMatrix DistortionMatrix::hamming(std::size_t rows,
                                           std::size_t cols) {
  std::vector<double> values(rows * cols, 1.0);
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) {
    values[i * cols + i] = 0.0;
  }
  return DistortionMatrix(rows, cols, std::move(values));
}

DistortionMatrix DistortionMatrix::squared_difference(
    const Alphabet& row_alphabet, const Alphabet& col_alphabet) {
  std::vector<double> values;
  values.reserve(row_alphabet.size() * col_alphabet.size());
  for (const auto& r : row_alphabet.symbols()) {
    const double rv = numeric_label(r, row_alphabet.name());
    for (const auto& c : col_alphabet.symbols()) {
      const double cv = numeric_label(c, col_alphabet.name());
      values.push_back((rv - cv) * (rv - cv));
    }
  }
  return DistortionMatrix(row_alphabet.size(), col_alphabet.size(),
                          std::move(values));
}

double DistortionMatrix::max_value() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, v);
  return m;
}

namespace {

// Flattened product walk over a list of alphabets; yields symbol tuples.
std::vector<std::vector<std::string>> all_tuples(
    const std::vector<const Alphabet*>& axes) {
  std::vector<std::vector<std::string>> out;
  std::size_t cells = 1;
  for (const auto* a : axes) cells *= a->size();
  std::vector<std::size_t> digits(axes.size(), 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    std::size_t rem = flat;
    for (std::size_t i = axes.size(); i-- > 0;) {
      digits[i] = rem % axes[i]->size();
      rem /= axes[i]->size();
    }
    std::vector<std::string> tuple;
    tuple.reserve(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) {
      tuple.push_back(axes[i]->symbol(digits[i]));
    }
    out.push_back(std::move(tuple));
  }
  return out;
}

// f-image label for each tuple, plus a per-tuple label used by label-keyed
// measures (single-attribute tuples use the bare symbol).
std::vector<std::string> apply_f(const TupleFunction& f,
                                 const std::vector<std::vector<std::string>>& tuples,
                                 const char* side) {
  std::vector<std::string> out;
  out.reserve(tuples.size());
  if (f.identity) {
    for (const auto& t : tuples) {
      std::string label;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) label.push_back('|');
        label += t[i];
      }
      out.push_back(std::move(label));
    }
    return out;
  }
  std::map<std::string, std::string> table;
  for (const auto& [in, image] : f.entries) {
    f.image->require(image);
    table[tuple_key(in)] = image;
  }
  for (const auto& t : tuples) {
    auto it = table.find(tuple_key(t));
    if (it == table.end()) {
      std::string label;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) label.push_back('|');
        label += t[i];
      }
      throw ValidationError(std::string("f table has no entry for ") + side +
                            " tuple (" + label + ")");
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

DistortionMatrix effective_distortion(const SourceSpec& spec, std::size_t l) {
  if (l >= spec.utility.constraints.size()) {
    throw ValidationError("utility constraint index out of range");
  }
  const UtilityConstraint& c = spec.utility.constraints[l];

  std::vector<const Alphabet*> src_axes, rec_axes;
  for (std::size_t p : spec.public_positions()) {
    src_axes.push_back(&spec.joint.axes()[p]);
  }
  for (const auto& r : spec.reconstruction) rec_axes.push_back(&r);

  const auto src_tuples = all_tuples(src_axes);
  const auto rec_tuples = all_tuples(rec_axes);
  const auto src_labels = apply_f(c.f, src_tuples, "source");
  const auto rec_labels = apply_f(c.f, rec_tuples, "reconstruction");

  const std::size_t rows = src_labels.size();
  const std::size_t cols = rec_labels.size();
  std::vector<double> values(rows * cols, 0.0);

  switch (c.g) {
    case DistortionKind::kHamming:
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t cc = 0; cc < cols; ++cc) {
          values[r * cols + cc] = src_labels[r] == rec_labels[cc] ? 0.0 : 1.0;
        }
      }
      break;
    case DistortionKind::kSquaredDifference:
      for (std::size_t r = 0; r < rows; ++r) {
        const double rv = numeric_label(src_labels[r], "f-image");
        for (std::size_t cc = 0; cc < cols; ++cc) {
          const double cv = numeric_label(rec_labels[cc], "f-image");
          values[r * cols + cc] = (rv - cv) * (rv - cv);
        }
      }
      break;
    case DistortionKind::kTable: {
      auto find = [](const std::vector<std::string>& labels,
                     const std::string& label, const char* what) {
        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) {
          throw ValidationError("distortion table has no " +
                                std::string(what) + " for label '" + label +
                                "'");
        }
        return static_cast<std::size_t>(it - labels.begin());
      };
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t tr = find(c.table_rows, src_labels[r], "row");
        for (std::size_t cc = 0; cc < cols; ++cc) {
          const std::size_t tc = find(c.table_cols, rec_labels[cc], "column");
          values[r * cols + cc] = c.table_values[tr * c.table_cols.size() + tc];
        }
      }
      break;
    }
  }
  return DistortionMatrix(rows, cols, std::move(values));
}

}  // namespace rdeq
