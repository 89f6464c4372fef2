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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rdeq/rng.hpp"

using namespace rdeq;
using oracles::binary_entropy;
using oracles::digit_alphabet;

namespace {

JointPmf bernoulli(double p, const std::string& name = "x") {
  return JointPmf({digit_alphabet(name, 2)}, {1.0 - p, p});
}

Channel binary_symmetric(double eps, const std::string& in = "x",
                         const std::string& out = "y") {
  return Channel({digit_alphabet(in, 2)}, {digit_alphabet(out, 2)},
                 {1.0 - eps, eps, eps, 1.0 - eps});
}

std::vector<std::string> names(std::initializer_list<const char*> list) {
  return std::vector<std::string>(list.begin(), list.end());
}

}  // namespace

TEST_CASE("entropy of basic distributions") {
  CHECK(entropy(JointPmf::uniform({digit_alphabet("x", 4)})) ==
        doctest::Approx(2.0).epsilon(1e-12));

  std::vector<std::size_t> cell{2};
  CHECK(entropy(JointPmf::point_mass({digit_alphabet("x", 4)}, cell)) ==
        doctest::Approx(0.0).epsilon(1e-15));

  const double h = entropy(bernoulli(0.11));
  CHECK(h == doctest::Approx(binary_entropy(0.11)).epsilon(1e-12));
  CHECK(std::abs(h - 0.49992) < 1e-4);
}

TEST_CASE("conditional entropy") {
  SUBCASE("independent pair") {
    JointPmf joint = attach_channel(
        bernoulli(0.3),
        Channel({digit_alphabet("x", 2)}, {digit_alphabet("y", 2)},
                {0.5, 0.5, 0.5, 0.5}));
    CHECK(conditional_entropy(joint, names({"x"}), names({"y"})) ==
          doctest::Approx(entropy(bernoulli(0.3))).epsilon(1e-10));
  }
  SUBCASE("deterministic copy") {
    JointPmf joint =
        attach_channel(bernoulli(0.4), binary_symmetric(0.0));
    CHECK(conditional_entropy(joint, names({"x"}), names({"y"})) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("uniform input through BSC(0.1)") {
    JointPmf joint = attach_channel(bernoulli(0.5), binary_symmetric(0.1));
    const double h = conditional_entropy(joint, names({"x"}), names({"y"}));
    CHECK(h == doctest::Approx(binary_entropy(0.1)).epsilon(1e-10));
    CHECK(std::abs(h - 0.4690) < 1e-4);
  }
  SUBCASE("axis errors") {
    JointPmf joint = attach_channel(bernoulli(0.5), binary_symmetric(0.1));
    CHECK_THROWS_AS(conditional_entropy(joint, names({"x"}), names({"x"})),
                    AxisError);
    CHECK_THROWS_AS(conditional_entropy(joint, names({"w"}), names({"y"})),
                    AxisError);
  }
}

TEST_CASE("mutual information") {
  SUBCASE("independent axes") {
    JointPmf joint = attach_channel(
        bernoulli(0.3),
        Channel({digit_alphabet("x", 2)}, {digit_alphabet("y", 2)},
                {0.7, 0.3, 0.7, 0.3}));
    CHECK(mutual_information(joint, names({"x"}), names({"y"})) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("perfect copy of a uniform bit") {
    JointPmf joint = attach_channel(bernoulli(0.5), binary_symmetric(0.0));
    CHECK(mutual_information(joint, names({"x"}), names({"y"})) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("uniform bit through BSC(0.1)") {
    JointPmf joint = attach_channel(bernoulli(0.5), binary_symmetric(0.1));
    const double i = mutual_information(joint, names({"x"}), names({"y"}));
    CHECK(i == doctest::Approx(1.0 - binary_entropy(0.1)).epsilon(1e-10));
    CHECK(std::abs(i - 0.5310) < 1e-4);
  }
}

TEST_CASE("marginalize") {
  SUBCASE("uniform square keeps uniform") {
    JointPmf joint =
        JointPmf::uniform({digit_alphabet("a", 2), digit_alphabet("b", 2)});
    JointPmf m = marginalize(joint, names({"a"}));
    CHECK(m.mass(0) == doctest::Approx(0.5));
    CHECK(m.mass(1) == doctest::Approx(0.5));
  }
  SUBCASE("point mass projects to point mass") {
    std::vector<std::size_t> cell{0, 1};
    JointPmf joint = JointPmf::point_mass(
        {digit_alphabet("a", 2), digit_alphabet("b", 2)}, cell);
    JointPmf m = marginalize(joint, names({"b"}));
    CHECK(m.mass(0) == doctest::Approx(0.0));
    CHECK(m.mass(1) == doctest::Approx(1.0));
  }
  SUBCASE("column sums") {
    JointPmf joint(
        {digit_alphabet("a", 2), digit_alphabet("b", 2)},
        {0.5, 0.1, 0.2, 0.2});
    JointPmf m = marginalize(joint, names({"a"}));
    CHECK(m.mass(0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(m.mass(1) == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("empty keep set is an axis error") {
    JointPmf joint = bernoulli(0.5);
    CHECK_THROWS_AS(marginalize(joint, {}), AxisError);
  }
}

TEST_CASE("attach_channel") {
  SUBCASE("identity is diagonal") {
    JointPmf joint = attach_channel(
        bernoulli(0.25), Channel({digit_alphabet("x", 2)},
                                 {digit_alphabet("y", 2)},
                                 {1, 0, 0, 1}));
    CHECK(joint.mass(0) == doctest::Approx(0.75));
    CHECK(joint.mass(1) == doctest::Approx(0.0));
    CHECK(joint.mass(2) == doctest::Approx(0.0));
    CHECK(joint.mass(3) == doctest::Approx(0.25));
  }
  SUBCASE("constant output is independent") {
    JointPmf joint = attach_channel(
        bernoulli(0.5), Channel({digit_alphabet("x", 2)},
                                {digit_alphabet("y", 2)},
                                {1, 0, 1, 0}));
    CHECK(mutual_information(joint, names({"x"}), names({"y"})) ==
          doctest::Approx(0.0));
    JointPmf out = marginalize(joint, names({"y"}));
    CHECK(out.mass(0) == doctest::Approx(1.0));
  }
  SUBCASE("uniform bit through BSC(0.11)") {
    JointPmf joint = attach_channel(bernoulli(0.5), binary_symmetric(0.11));
    CHECK(joint.mass(0) == doctest::Approx(0.445).epsilon(1e-12));
    CHECK(joint.mass(1) == doctest::Approx(0.055).epsilon(1e-12));
    CHECK(joint.mass(2) == doctest::Approx(0.055).epsilon(1e-12));
    CHECK(joint.mass(3) == doctest::Approx(0.445).epsilon(1e-12));
  }
  SUBCASE("axis mismatch") {
    CHECK_THROWS_AS(
        attach_channel(bernoulli(0.5), binary_symmetric(0.1, "w", "y")),
        AxisError);
    CHECK_THROWS_AS(
        attach_channel(bernoulli(0.5), binary_symmetric(0.1, "x", "x")),
        AxisError);
  }
}

TEST_CASE("information identities on random joints") {
  SplitMix64 rng(20260809);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t na = 2 + rng.next_below(4);  // <= 5
    const std::size_t nb = 2 + rng.next_below(4);
    std::vector<Alphabet> axes{digit_alphabet("a", na),
                               digit_alphabet("b", nb)};
    std::vector<double> mass(na * nb);
    dirichlet_row(rng, mass);
    JointPmf joint(axes, mass);

    const double h_ab = entropy(joint);
    const double h_a = entropy(marginalize(joint, names({"a"})));
    const double h_b = entropy(marginalize(joint, names({"b"})));
    const double h_a_given_b = conditional_entropy(joint, names({"a"}), names({"b"}));
    const double h_b_given_a = conditional_entropy(joint, names({"b"}), names({"a"}));
    const double i = mutual_information(joint, names({"a"}), names({"b"}));

    // Chain rule.
    CHECK(std::abs(h_ab - (h_a + h_b_given_a)) < 1e-10);
    CHECK(std::abs(h_ab - (h_b + h_a_given_b)) < 1e-10);
    // Both I identities.
    CHECK(std::abs(i - (h_a - h_a_given_b)) < 1e-10);
    CHECK(std::abs(i - (h_b - h_b_given_a)) < 1e-10);
    // Nonnegativity and conditioning reduces entropy.
    CHECK(i >= 0.0);
    CHECK(h_a_given_b <= h_a + 1e-12);
  }
}

TEST_CASE("marginal entropy equals analytic marginal") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> mass(6);
    dirichlet_row(rng, mass);
    JointPmf joint({digit_alphabet("a", 2), digit_alphabet("b", 3)}, mass);
    // Analytic row sums.
    double r0 = mass[0] + mass[1] + mass[2];
    double r1 = mass[3] + mass[4] + mass[5];
    const double expected = -(r0 > 0 ? r0 * std::log2(r0) : 0.0) -
                            (r1 > 0 ? r1 * std::log2(r1) : 0.0);
    CHECK(std::abs(entropy(marginalize(joint, names({"a"}))) - expected) <
          1e-10);
  }
}

TEST_CASE("attach_channel output mass sums to one") {
  SplitMix64 rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.next_below(3);
    const std::size_t m = 2 + rng.next_below(3);
    std::vector<double> mass(n);
    dirichlet_row(rng, mass);
    std::vector<double> kernel(n * m);
    for (std::size_t r = 0; r < n; ++r) {
      dirichlet_row(rng, std::span<double>(kernel.data() + r * m, m));
    }
    JointPmf prior({digit_alphabet("x", n)}, mass);
    Channel ch({digit_alphabet("x", n)}, {digit_alphabet("y", m)}, kernel);
    JointPmf joint = attach_channel(prior, ch);
    double total = 0.0;
    for (std::size_t i = 0; i < joint.cell_count(); ++i) total += joint.mass(i);
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("pmf validation") {
  CHECK_THROWS_AS(JointPmf({digit_alphabet("x", 2)}, {0.6, -0.1}),
                  ValidationError);
  CHECK_THROWS_AS(JointPmf({digit_alphabet("x", 2)}, {0.6, 0.5}),
                  ValidationError);
  // Within tolerance: renormalized.
  JointPmf p({digit_alphabet("x", 2)}, {0.5, 0.5 - 5e-10});
  double total = p.mass(0) + p.mass(1);
  CHECK(std::abs(total - 1.0) < 1e-15);
  CHECK_THROWS_AS(Alphabet("x", {"a", "a"}), ValidationError);
  CHECK_THROWS_AS(Alphabet("x", {}), ValidationError);
  CHECK_THROWS_AS(Channel({digit_alphabet("x", 2)}, {digit_alphabet("y", 2)},
                          {0.5, 0.4, 0.5, 0.5}),
                  ValidationError);
}
