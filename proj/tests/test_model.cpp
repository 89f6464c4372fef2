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

#include <cmath>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "rdeq/distortion.hpp"

using namespace rdeq;

namespace {

const char* kMinimalModel = R"({
  "alphabets": [{"name": "x", "symbols": ["0", "1"]}],
  "roles": {"public": ["x"], "private": ["x"], "encoded": ["x"]},
  "pmf": {"axes": ["x"], "values": [0.5, 0.5]},
  "utility": [{"f": "identity", "g": "hamming", "D": 0.1}],
  "privacy": {"E": 0.0}
})";

std::string replace(std::string text, const std::string& from,
                    const std::string& to) {
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("load minimal census model") {
  SourceSpec spec = load_spec(kMinimalModel);
  CHECK(spec.roles.all == std::vector<std::string>{"x"});
  CHECK(spec.utility.constraints.size() == 1);
  CHECK(spec.utility.constraints[0].bound == doctest::Approx(0.1));
  CHECK(entropy(spec.joint) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(spec.has_side_info());
  // Default reconstruction alphabet mirrors the source with a new name.
  REQUIRE(spec.reconstruction.size() == 1);
  CHECK(spec.reconstruction[0].name() == "x_hat");
}

TEST_CASE("near-normalized pmf loads after renormalization") {
  std::string doc = replace(kMinimalModel, "[0.5, 0.5]", "[0.5, 0.4999999]");
  SourceSpec spec = load_spec(doc);
  double total = 0.0;
  for (std::size_t i = 0; i < spec.joint.cell_count(); ++i) {
    total += spec.joint.mass(i);
  }
  CHECK(std::abs(total - 1.0) < 1e-15);
}

TEST_CASE("load errors") {
  SUBCASE("negative mass") {
    std::string doc = replace(kMinimalModel, "[0.5, 0.5]", "[1.1, -0.1]");
    CHECK_THROWS_AS(load_spec(doc), ValidationError);
  }
  SUBCASE("mass far from one") {
    std::string doc = replace(kMinimalModel, "[0.5, 0.5]", "[0.5, 0.4]");
    CHECK_THROWS_AS(load_spec(doc), ValidationError);
  }
  SUBCASE("role cover violation") {
    const char* doc = R"({
      "alphabets": [{"name": "a", "symbols": ["0", "1"]},
                     {"name": "b", "symbols": ["0", "1"]}],
      "roles": {"public": ["a"], "private": [], "encoded": ["a"]},
      "pmf": {"axes": ["a", "b"], "values": [0.25, 0.25, 0.25, 0.25]},
      "utility": [{"g": "hamming", "D": 0.1}],
      "privacy": {"E": 0.0}
    })";
    CHECK_THROWS_AS(load_spec(doc), ValidationError);
  }
  SUBCASE("not json") {
    CHECK_THROWS_AS(load_spec("not a document"), ValidationError);
  }
  SUBCASE("public attribute missing from encoded set") {
    const char* doc = R"({
      "alphabets": [{"name": "a", "symbols": ["0", "1"]},
                     {"name": "b", "symbols": ["0", "1"]}],
      "roles": {"public": ["a", "b"], "private": ["b"], "encoded": ["a"]},
      "pmf": {"axes": ["a", "b"], "values": [0.25, 0.25, 0.25, 0.25]},
      "utility": [{"g": "hamming", "D": 0.1}],
      "privacy": {"E": 0.0}
    })";
    CHECK_THROWS_AS(load_spec(doc), ValidationError);
  }
}

TEST_CASE("load_spec is idempotent") {
  const char* doc = R"({
    "alphabets": [{"name": "a", "symbols": ["lo", "hi"]},
                   {"name": "b", "symbols": ["0", "1", "2"]},
                   {"name": "z", "symbols": ["u", "v"]}],
    "roles": {"public": ["a"], "private": ["b"], "encoded": ["a", "b"]},
    "pmf": {"axes": ["a", "b", "z"],
            "values": [0.1, 0.05, 0.05, 0.1, 0.1, 0.1,
                       0.05, 0.05, 0.1, 0.1, 0.1, 0.1]},
    "side_info": "z",
    "utility": [{"g": "hamming", "D": 0.2}],
    "privacy": {"E": 0.25}
  })";
  SourceSpec spec = load_spec(doc);
  std::string first = save_spec(spec);
  SourceSpec reloaded = load_spec(first);
  CHECK(spec.roles.all == reloaded.roles.all);
  CHECK(spec.roles.public_set == reloaded.roles.public_set);
  CHECK(spec.side_info_axis == reloaded.side_info_axis);
  CHECK(spec.privacy.equivocation_bound ==
        doctest::Approx(reloaded.privacy.equivocation_bound));
  REQUIRE(spec.joint.cell_count() == reloaded.joint.cell_count());
  for (std::size_t i = 0; i < spec.joint.cell_count(); ++i) {
    CHECK(std::abs(spec.joint.mass(i) - reloaded.joint.mass(i)) < 1e-12);
  }
  CHECK(save_spec(reloaded) == first);
}

TEST_CASE("csv ingestion") {
  std::vector<Alphabet> schema{oracles::digit_alphabet("x", 2)};
  SUBCASE("three rows") {
    Database db = ingest_csv("x\n0\n1\n0\n", schema);
    REQUIRE(db.row_count() == 3);
    CHECK(db.rows[0][0] == 0);
    CHECK(db.rows[1][0] == 1);
  }
  SUBCASE("unknown symbol reports the line") {
    try {
      ingest_csv("x\n0\n2\n", schema);
      FAIL("expected RowError");
    } catch (const RowError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("empty body is a valid zero-row database") {
    Database db = ingest_csv("x\n", schema);
    CHECK(db.row_count() == 0);
  }
  SUBCASE("missing column is a schema error") {
    std::vector<Alphabet> two{oracles::digit_alphabet("x", 2),
                              oracles::digit_alphabet("y", 2)};
    CHECK_THROWS_AS(ingest_csv("x\n0\n", two), SchemaError);
    CHECK_THROWS_AS(ingest_csv("y\n0\n", schema), SchemaError);
  }
  SUBCASE("field count mismatch reports the line") {
    CHECK_THROWS_AS(ingest_csv("x\n0,1\n", schema), RowError);
  }
}

TEST_CASE("csv round trip is byte exact") {
  std::vector<Alphabet> schema{oracles::digit_alphabet("x", 2),
                               Alphabet("label", {"aa", "bb", "cc"})};
  const std::string text = "x,label\n0,bb\n1,aa\n1,cc\n0,aa\n";
  Database db = ingest_csv(text, schema);
  CHECK(to_csv(db) == text);
}

TEST_CASE("empirical estimation") {
  std::vector<Alphabet> schema{oracles::digit_alphabet("a", 2),
                               oracles::digit_alphabet("b", 2)};
  SUBCASE("all four cells once") {
    Database db = ingest_csv("a,b\n0,0\n0,1\n1,0\n1,1\n", schema);
    JointPmf p = estimate_empirical(db);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(p.mass(i) == doctest::Approx(0.25).epsilon(1e-15));
    }
  }
  SUBCASE("identical rows give a point mass") {
    Database db = ingest_csv("a,b\n1,0\n1,0\n", schema);
    JointPmf p = estimate_empirical(db);
    CHECK(p.mass(2) == doctest::Approx(1.0));
  }
  SUBCASE("two thirds, one third") {
    std::vector<Alphabet> one{oracles::digit_alphabet("x", 2)};
    Database db = ingest_csv("x\n0\n0\n1\n", one);
    JointPmf p = estimate_empirical(db);
    CHECK(p.mass(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(p.mass(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("mass sums to one exactly") {
    Database db = ingest_csv("a,b\n0,0\n0,1\n1,0\n0,0\n1,1\n1,1\n0,1\n",
                             schema);
    JointPmf p = estimate_empirical(db);
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) total += p.mass(i);
    CHECK(std::abs(total - 1.0) < 1e-15);
  }
  SUBCASE("empty database errors") {
    Database db = ingest_csv("a,b\n", schema);
    CHECK_THROWS_AS(estimate_empirical(db), ValidationError);
  }
}

TEST_CASE("effective distortion matrices") {
  SUBCASE("hamming on a census model") {
    SourceSpec spec = load_spec(kMinimalModel);
    DistortionMatrix d = effective_distortion(spec, 0);
    CHECK(d.at(0, 0) == 0.0);
    CHECK(d.at(0, 1) == 1.0);
    CHECK(d.at(1, 0) == 1.0);
    CHECK(d.at(1, 1) == 0.0);
  }
  SUBCASE("squared difference needs numeric labels") {
    std::string doc = replace(kMinimalModel, "\"hamming\"", "\"squared\"");
    SourceSpec spec = load_spec(doc);
    DistortionMatrix d = effective_distortion(spec, 0);
    CHECK(d.at(0, 1) == doctest::Approx(1.0));
    CHECK(d.at(0, 0) == doctest::Approx(0.0));

    std::string bad = replace(doc, R"(["0", "1"])", R"(["low", "high"])");
    SourceSpec spec_bad = load_spec(bad);
    CHECK_THROWS_AS(effective_distortion(spec_bad, 0), ValidationError);
  }
  SUBCASE("table form with an f map") {
    const char* doc = R"({
      "alphabets": [{"name": "x", "symbols": ["0", "1", "2"]}],
      "roles": {"public": ["x"], "private": ["x"], "encoded": ["x"]},
      "pmf": {"axes": ["x"], "values": [0.4, 0.35, 0.25]},
      "utility": [{
        "f": {"image": {"name": "v", "symbols": ["lo", "hi"]},
               "map": [{"in": ["0"], "out": "lo"},
                        {"in": ["1"], "out": "lo"},
                        {"in": ["2"], "out": "hi"}]},
        "g": {"table": {"rows": ["lo", "hi"], "cols": ["lo", "hi"],
                          "values": [[0, 2], [3, 0]]}},
        "D": 0.5
      }],
      "privacy": {"E": 0.0}
    })";
    SourceSpec spec = load_spec(doc);
    DistortionMatrix d = effective_distortion(spec, 0);
    REQUIRE(d.rows() == 3);
    REQUIRE(d.cols() == 3);
    CHECK(d.at(0, 2) == doctest::Approx(2.0));  // lo -> hi
    CHECK(d.at(2, 0) == doctest::Approx(3.0));  // hi -> lo
    CHECK(d.at(0, 1) == doctest::Approx(0.0));  // lo -> lo
  }
}
