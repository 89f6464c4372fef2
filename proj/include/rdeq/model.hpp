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
// The database source specification: attribute roles, side information,
// utility and privacy requirements, model-file loading, CSV ingestion and
// empirical pmf estimation.

#ifndef RDEQ_MODEL_HPP_
#define RDEQ_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdeq/prob.hpp"

namespace rdeq {

// Which attributes are public (revealed), private (hidden) and encoded.
// An attribute may be both public and private; together they must cover
// the full attribute list, and public ⊆ encoded ⊆ all.
struct AttributeRoles {
  std::vector<std::string> all;
  std::vector<std::string> public_set;
  std::vector<std::string> private_set;
  std::vector<std::string> encoded_set;

  void validate() const;
  bool is_public(const std::string& name) const;
  bool is_private(const std::string& name) const;
  bool is_encoded(const std::string& name) const;
};

// Per-symbol function applied to public-attribute tuples before the
// distortion measure; identity by default, otherwise an explicit table.
struct TupleFunction {
  bool identity = true;
  // Table form: image alphabet plus one entry per tuple it must cover.
  std::optional<Alphabet> image;
  // Tuple of symbols (one per public attribute) -> image symbol index.
  std::vector<std::pair<std::vector<std::string>, std::string>> entries;
};

enum class DistortionKind { kHamming, kSquaredDifference, kTable };

// One utility requirement: average g(f(x_r), f(x̂_r)) <= bound.
struct UtilityConstraint {
  TupleFunction f;
  DistortionKind g = DistortionKind::kHamming;
  // Table form of g, indexed by f-image symbols (source rows, recon cols).
  std::vector<std::string> table_rows;
  std::vector<std::string> table_cols;
  std::vector<double> table_values;  // row-major
  double bound = 0.0;
};

struct UtilitySpec {
  std::vector<UtilityConstraint> constraints;  // L >= 1
};

struct PrivacySpec {
  double equivocation_bound = 0.0;  // E, in bits
};

// A fully validated model: joint source distribution, roles, optional
// side-information axis, reconstruction alphabets, and requirements.
struct SourceSpec {
  AttributeRoles roles;
  JointPmf joint;  // axes: attributes in roles.all order, then Z if present
  std::string side_info_axis;             // empty when absent
  std::vector<Alphabet> reconstruction;   // one per public attribute
  UtilitySpec utility;
  PrivacySpec privacy;

  bool has_side_info() const { return !side_info_axis.empty(); }
  std::size_t attribute_count() const { return roles.all.size(); }
  const Alphabet& attribute_alphabet(const std::string& name) const;
  // Positions of the public / private attributes within roles.all order.
  std::vector<std::size_t> public_positions() const;
  std::vector<std::size_t> private_positions() const;

  void validate() const;
};

// Parses and validates a JSON model document.
SourceSpec load_spec(const std::string& text);
// Serializes a spec back to the model-document format.
std::string save_spec(const SourceSpec& spec);

// Ordered rows of attribute values over the schema's alphabets.
struct Database {
  std::vector<Alphabet> schema;
  std::vector<std::vector<std::uint32_t>> rows;  // symbol indices per column

  std::size_t row_count() const { return rows.size(); }
};

// Parses a CSV document (UTF-8, header row, comma separators, \n endings).
// The header must name the schema columns in order.
Database ingest_csv(const std::string& text, std::span<const Alphabet> schema);

// Serializes a database back to CSV; inverse of ingest_csv modulo trailing
// whitespace.
std::string to_csv(const Database& db);

// Relative-frequency joint pmf over the schema's product alphabet.
JointPmf estimate_empirical(const Database& db);

}  // namespace rdeq

#endif  // RDEQ_MODEL_HPP_
