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

#include "rdeq/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace rdeq {

namespace {

using Json = nlohmann::ordered_json;

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

Alphabet parse_alphabet(const Json& j) {
  if (!j.is_object() || !j.contains("name") || !j.contains("symbols")) {
    throw ValidationError("alphabet entries need 'name' and 'symbols'");
  }
  std::vector<std::string> symbols;
  for (const auto& s : j.at("symbols")) symbols.push_back(s.get<std::string>());
  return Alphabet(j.at("name").get<std::string>(), std::move(symbols));
}

Json alphabet_to_json(const Alphabet& a) {
  Json j;
  j["name"] = a.name();
  j["symbols"] = a.symbols();
  return j;
}

std::vector<std::string> parse_name_list(const Json& j, const char* what) {
  if (!j.is_array()) {
    throw ValidationError(std::string(what) + " must be a list of names");
  }
  std::vector<std::string> out;
  for (const auto& s : j) out.push_back(s.get<std::string>());
  return out;
}

DistortionKind parse_g_kind(const std::string& s) {
  if (s == "hamming") return DistortionKind::kHamming;
  if (s == "squared") return DistortionKind::kSquaredDifference;
  throw ValidationError("unknown distortion measure '" + s +
                        "' (expected hamming, squared, or a table)");
}

}  // namespace

void AttributeRoles::validate() const {
  if (all.empty()) throw ValidationError("model has no attributes");
  std::unordered_set<std::string> known(all.begin(), all.end());
  if (known.size() != all.size()) {
    throw ValidationError("duplicate attribute name");
  }
  auto check_subset = [&](const std::vector<std::string>& set,
                          const char* label) {
    std::unordered_set<std::string> seen;
    for (const auto& n : set) {
      if (!known.count(n)) {
        throw ValidationError(std::string(label) + " set references unknown attribute '" + n + "'");
      }
      if (!seen.insert(n).second) {
        throw ValidationError(std::string(label) + " set lists '" + n + "' twice");
      }
    }
  };
  check_subset(public_set, "public");
  check_subset(private_set, "private");
  check_subset(encoded_set, "encoded");

  // The public and private sets together must cover every attribute.
  for (const auto& n : all) {
    if (!contains(public_set, n) && !contains(private_set, n)) {
      throw ValidationError("attribute '" + n +
                            "' is neither public nor private");
    }
  }
  // public ⊆ encoded ⊆ all.
  for (const auto& n : public_set) {
    if (!contains(encoded_set, n)) {
      throw ValidationError("public attribute '" + n +
                            "' is missing from the encoded set");
    }
  }
}

bool AttributeRoles::is_public(const std::string& name) const {
  return contains(public_set, name);
}
bool AttributeRoles::is_private(const std::string& name) const {
  return contains(private_set, name);
}
bool AttributeRoles::is_encoded(const std::string& name) const {
  return contains(encoded_set, name);
}

const Alphabet& SourceSpec::attribute_alphabet(const std::string& name) const {
  return joint.axes()[joint.layout().axis_index(name)];
}

std::vector<std::size_t> SourceSpec::public_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.all.size(); ++i) {
    if (roles.is_public(roles.all[i])) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SourceSpec::private_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.all.size(); ++i) {
    if (roles.is_private(roles.all[i])) out.push_back(i);
  }
  return out;
}

void SourceSpec::validate() const {
  roles.validate();

  const std::size_t expected_axes =
      roles.all.size() + (has_side_info() ? 1 : 0);
  if (joint.axes().size() != expected_axes) {
    throw ValidationError("pmf axes do not match the attribute list");
  }
  for (std::size_t i = 0; i < roles.all.size(); ++i) {
    if (joint.axes()[i].name() != roles.all[i]) {
      throw ValidationError("pmf axis " + std::to_string(i) +
                            " is '" + joint.axes()[i].name() +
                            "', expected attribute '" + roles.all[i] + "'");
    }
  }
  if (has_side_info()) {
    if (joint.axes().back().name() != side_info_axis) {
      throw ValidationError("side-information axis must be the last pmf axis");
    }
    if (contains(roles.all, side_info_axis)) {
      throw ValidationError("side-information axis collides with an attribute");
    }
  }

  auto pub = public_positions();
  if (reconstruction.size() != pub.size()) {
    throw ValidationError("need one reconstruction alphabet per public attribute");
  }
  for (const auto& r : reconstruction) {
    if (joint.layout().has_axis(r.name())) {
      throw ValidationError("reconstruction alphabet '" + r.name() +
                            "' collides with a model axis");
    }
  }

  if (utility.constraints.empty()) {
    throw ValidationError("at least one utility constraint is required");
  }
  for (const auto& c : utility.constraints) {
    if (!(c.bound >= 0.0) || !std::isfinite(c.bound)) {
      throw ValidationError("utility bound D must be finite and >= 0");
    }
    if (c.g == DistortionKind::kTable) {
      if (c.table_rows.empty() || c.table_cols.empty() ||
          c.table_values.size() != c.table_rows.size() * c.table_cols.size()) {
        throw ValidationError("distortion table shape mismatch");
      }
      for (double v : c.table_values) {
        if (!std::isfinite(v) || v < 0.0) {
          throw ValidationError("distortion table entries must be finite and >= 0");
        }
      }
    }
    if (!c.f.identity) {
      if (!c.f.image.has_value() || c.f.entries.empty()) {
        throw ValidationError("table-form f needs an image alphabet and entries");
      }
    }
  }
  if (!(privacy.equivocation_bound >= 0.0) ||
      !std::isfinite(privacy.equivocation_bound)) {
    throw ValidationError("privacy bound E must be finite and >= 0");
  }
}

SourceSpec load_spec(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model document is not valid JSON: ") +
                          e.what());
  }
  if (!doc.is_object()) throw ValidationError("model document must be an object");

  std::unordered_map<std::string, Alphabet> alphabets;
  if (!doc.contains("alphabets")) throw ValidationError("missing 'alphabets'");
  for (const auto& a : doc.at("alphabets")) {
    Alphabet alpha = parse_alphabet(a);
    std::string name = alpha.name();
    if (!alphabets.emplace(name, std::move(alpha)).second) {
      throw ValidationError("alphabet '" + name + "' declared twice");
    }
  }
  auto require_alphabet = [&](const std::string& name) -> const Alphabet& {
    auto it = alphabets.find(name);
    if (it == alphabets.end()) {
      throw ValidationError("no alphabet declared for '" + name + "'");
    }
    return it->second;
  };

  if (!doc.contains("pmf") || !doc.at("pmf").is_object()) {
    throw ValidationError("missing 'pmf' object");
  }
  auto axis_names = parse_name_list(doc.at("pmf").at("axes"), "pmf.axes");
  std::string side_info;
  if (doc.contains("side_info") && !doc.at("side_info").is_null()) {
    side_info = doc.at("side_info").get<std::string>();
    if (!contains(axis_names, side_info)) {
      throw ValidationError("side_info axis '" + side_info +
                            "' is not a pmf axis");
    }
    if (axis_names.back() != side_info) {
      throw ValidationError("side_info axis must be the last pmf axis");
    }
  }

  AttributeRoles roles;
  for (const auto& n : axis_names) {
    if (n != side_info) roles.all.push_back(n);
  }
  if (!doc.contains("roles") || !doc.at("roles").is_object()) {
    throw ValidationError("missing 'roles' object");
  }
  const auto& roles_doc = doc.at("roles");
  roles.public_set = parse_name_list(roles_doc.at("public"), "roles.public");
  roles.private_set = parse_name_list(roles_doc.at("private"), "roles.private");
  roles.encoded_set = roles_doc.contains("encoded")
                          ? parse_name_list(roles_doc.at("encoded"), "roles.encoded")
                          : roles.all;

  std::vector<Alphabet> axes;
  for (const auto& n : axis_names) axes.push_back(require_alphabet(n));
  std::vector<double> values;
  for (const auto& v : doc.at("pmf").at("values")) {
    values.push_back(v.get<double>());
  }
  JointPmf joint(std::move(axes), std::move(values), kLoadMassTolerance);

  SourceSpec spec{std::move(roles), std::move(joint), side_info, {}, {}, {}};

  // Reconstruction alphabets: defaults mirror the source public alphabets
  // under a '_hat' suffix so joint tensors keep distinct axis names.
  auto pub = spec.public_positions();
  if (doc.contains("reconstruction") && !doc.at("reconstruction").is_null()) {
    for (const auto& r : doc.at("reconstruction")) {
      spec.reconstruction.push_back(parse_alphabet(r));
    }
  } else {
    for (std::size_t p : pub) {
      const Alphabet& src = spec.joint.axes()[p];
      spec.reconstruction.emplace_back(src.name() + "_hat", src.symbols());
    }
  }

  if (!doc.contains("utility") || !doc.at("utility").is_array()) {
    throw ValidationError("missing 'utility' list");
  }
  for (const auto& u : doc.at("utility")) {
    UtilityConstraint c;
    if (u.contains("f") && !u.at("f").is_null()) {
      const auto& f = u.at("f");
      if (f.is_string()) {
        if (f.get<std::string>() != "identity") {
          throw ValidationError("unknown f '" + f.get<std::string>() + "'");
        }
      } else {
        c.f.identity = false;
        c.f.image = parse_alphabet(f.at("image"));
        for (const auto& e : f.at("map")) {
          std::vector<std::string> in;
          for (const auto& s : e.at("in")) in.push_back(s.get<std::string>());
          c.f.entries.emplace_back(std::move(in), e.at("out").get<std::string>());
        }
      }
    }
    if (!u.contains("g")) throw ValidationError("utility entry missing 'g'");
    if (u.at("g").is_string()) {
      c.g = parse_g_kind(u.at("g").get<std::string>());
    } else {
      c.g = DistortionKind::kTable;
      const auto& t = u.at("g").at("table");
      c.table_rows = parse_name_list(t.at("rows"), "g.table.rows");
      c.table_cols = parse_name_list(t.at("cols"), "g.table.cols");
      for (const auto& row : t.at("values")) {
        for (const auto& v : row) c.table_values.push_back(v.get<double>());
      }
    }
    if (!u.contains("D")) throw ValidationError("utility entry missing 'D'");
    c.bound = u.at("D").get<double>();
    spec.utility.constraints.push_back(std::move(c));
  }

  if (doc.contains("privacy") && !doc.at("privacy").is_null()) {
    spec.privacy.equivocation_bound = doc.at("privacy").at("E").get<double>();
  }

  spec.validate();
  return spec;
}

std::string save_spec(const SourceSpec& spec) {
  Json doc;
  Json alphabets = Json::array();
  for (const auto& a : spec.joint.axes()) alphabets.push_back(alphabet_to_json(a));
  doc["alphabets"] = std::move(alphabets);
  doc["roles"] = {{"public", spec.roles.public_set},
                  {"private", spec.roles.private_set},
                  {"encoded", spec.roles.encoded_set}};
  Json pmf;
  std::vector<std::string> axis_names;
  for (const auto& a : spec.joint.axes()) axis_names.push_back(a.name());
  pmf["axes"] = axis_names;
  pmf["values"] = std::vector<double>(spec.joint.raw().begin(),
                                      spec.joint.raw().end());
  doc["pmf"] = std::move(pmf);
  if (spec.has_side_info()) doc["side_info"] = spec.side_info_axis;
  Json recon = Json::array();
  for (const auto& r : spec.reconstruction) recon.push_back(alphabet_to_json(r));
  doc["reconstruction"] = std::move(recon);

  Json utility = Json::array();
  for (const auto& c : spec.utility.constraints) {
    Json u;
    if (c.f.identity) {
      u["f"] = "identity";
    } else {
      Json f;
      f["image"] = alphabet_to_json(*c.f.image);
      Json map = Json::array();
      for (const auto& [in, out] : c.f.entries) {
        map.push_back({{"in", in}, {"out", out}});
      }
      f["map"] = std::move(map);
      u["f"] = std::move(f);
    }
    switch (c.g) {
      case DistortionKind::kHamming:
        u["g"] = "hamming";
        break;
      case DistortionKind::kSquaredDifference:
        u["g"] = "squared";
        break;
      case DistortionKind::kTable: {
        Json rows = Json::array();
        for (std::size_t r = 0; r < c.table_rows.size(); ++r) {
          Json row = Json::array();
          for (std::size_t col = 0; col < c.table_cols.size(); ++col) {
            row.push_back(c.table_values[r * c.table_cols.size() + col]);
          }
          rows.push_back(std::move(row));
        }
        u["g"] = {{"table", {{"rows", c.table_rows},
                             {"cols", c.table_cols},
                             {"values", std::move(rows)}}}};
        break;
      }
    }
    u["D"] = c.bound;
    utility.push_back(std::move(u));
  }
  doc["utility"] = std::move(utility);
  doc["privacy"] = {{"E", spec.privacy.equivocation_bound}};
  return doc.dump(2) + "\n";
}

Database ingest_csv(const std::string& text, std::span<const Alphabet> schema) {
  if (schema.empty()) throw SchemaError("database schema is empty");

  std::vector<std::string> lines;
  {
    std::string current;
    for (char ch : text) {
      if (ch == '\n') {
        lines.push_back(current);
        current.clear();
      } else {
        current.push_back(ch);
      }
    }
    if (!current.empty()) lines.push_back(current);
  }
  if (lines.empty()) throw SchemaError("CSV document has no header row");

  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(field);
        field.clear();
      } else {
        field.push_back(ch);
      }
    }
    fields.push_back(field);
    if (!fields.empty() && !fields.back().empty() &&
        fields.back().back() == '\r') {
      fields.back().pop_back();
    }
    return fields;
  };

  auto header = split(lines[0]);
  if (header.size() != schema.size()) {
    throw SchemaError("CSV header has " + std::to_string(header.size()) +
                      " columns, schema expects " +
                      std::to_string(schema.size()));
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (header[c] != schema[c].name()) {
      throw SchemaError("CSV column " + std::to_string(c + 1) + " is '" +
                        header[c] + "', expected '" + schema[c].name() + "'");
    }
  }

  Database db;
  db.schema.assign(schema.begin(), schema.end());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) continue;  // tolerate blank lines
    auto fields = split(lines[i]);
    if (fields.size() != schema.size()) {
      throw RowError(line_no, "expected " + std::to_string(schema.size()) +
                                  " fields, found " +
                                  std::to_string(fields.size()));
    }
    std::vector<std::uint32_t> row(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      auto idx = schema[c].index_of(fields[c]);
      if (!idx) {
        throw RowError(line_no, "symbol '" + fields[c] +
                                    "' is not in alphabet '" +
                                    schema[c].name() + "'");
      }
      row[c] = static_cast<std::uint32_t>(*idx);
    }
    db.rows.push_back(std::move(row));
  }
  return db;
}

std::string to_csv(const Database& db) {
  std::ostringstream out;
  for (std::size_t c = 0; c < db.schema.size(); ++c) {
    if (c) out << ',';
    out << db.schema[c].name();
  }
  out << '\n';
  for (const auto& row : db.rows) {
    for (std::size_t c = 0; c < db.schema.size(); ++c) {
      if (c) out << ',';
      out << db.schema[c].symbol(row[c]);
    }
    out << '\n';
  }
  return out.str();
}

JointPmf estimate_empirical(const Database& db) {
  if (db.rows.empty()) {
    throw ValidationError("cannot estimate a pmf from an empty database");
  }
  AxisLayout layout(db.schema);
  std::vector<std::uint64_t> counts(layout.cell_count(), 0);
  std::vector<std::size_t> digits(db.schema.size());
  for (const auto& row : db.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) digits[c] = row[c];
    counts[layout.flatten(digits)]++;
  }
  std::vector<double> mass(counts.size());
  const double n = static_cast<double>(db.rows.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    mass[i] = static_cast<double>(counts[i]) / n;
  }
  return JointPmf(db.schema, std::move(mass), kLoadMassTolerance);
}

}  // namespace rdeq
