// Copyright 2026 The bpre Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include "bpre/environment.hpp"
#include "bpre/error.hpp"
#include "doctest.h"

using bpre::EnvironmentModel;
using bpre::OffspringLaw;
using doctest::Approx;

namespace {

std::vector<OffspringLaw> two_poisson() {
  return {OffspringLaw::poisson(1.5), OffspringLaw::poisson(2.5)};
}

std::vector<std::size_t> states(const bpre::EnvironmentSequence& e) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < e.size(); ++k) out.push_back(e.state(k));
  return out;
}

}  // namespace

TEST_CASE("deterministic extension rules") {
  const auto laws = two_poisson();
  const auto last = bpre::realize(EnvironmentModel::deterministic(laws), 5, 0);
  CHECK(states(last) == std::vector<std::size_t>{0, 1, 1, 1, 1});
  const auto cyc =
      bpre::realize(EnvironmentModel::deterministic(laws, bpre::Extension::kCyclic), 5, 0);
  CHECK(states(cyc) == std::vector<std::size_t>{0, 1, 0, 1, 0});
  CHECK(cyc.law(1).mean() == Approx(2.5));
  CHECK(cyc.log_mean(0) == Approx(std::log(1.5)));
}

TEST_CASE("deterministic models ignore the seed") {
  const auto m = EnvironmentModel::deterministic(two_poisson(), bpre::Extension::kCyclic);
  CHECK(states(bpre::realize(m, 9, 1)) == states(bpre::realize(m, 9, 2)));
}

TEST_CASE("realize is reproducible and prefix-consistent") {
  const auto m = EnvironmentModel::iid(two_poisson(), {0.3, 0.7});
  const auto a = states(bpre::realize(m, 50, 7));
  CHECK(a == states(bpre::realize(m, 50, 7)));
  CHECK(a != states(bpre::realize(m, 50, 8)));
  auto longer = states(bpre::realize(m, 80, 7));
  longer.resize(50);
  CHECK(a == longer);
  const auto ext = states(bpre::realize(m, 20, 7).extended(50));
  CHECK(ext == a);
}

TEST_CASE("shift composes: T^a T^b = T^(a+b)") {
  const auto m = EnvironmentModel::markov_stationary(two_poisson(), {{0.9, 0.1}, {0.2, 0.8}});
  const auto e = bpre::realize(m, 60, 3);
  const auto ab = e.shift(7).shift(11);
  const auto direct = e.shift(18);
  CHECK(ab.size() == direct.size());
  CHECK(states(ab) == states(direct));
  CHECK(ab.offset() == 18);
  CHECK(ab.state(0) == e.state(18));
  CHECK_THROWS_AS(e.shift(60), bpre::HorizonError);
}

TEST_CASE("IID frequencies match the weights") {
  const auto m = EnvironmentModel::iid(two_poisson(), {0.3, 0.7});
  const auto e = bpre::realize(m, 200000, 5);
  double ones = 0;
  for (std::size_t k = 0; k < e.size(); ++k) ones += static_cast<double>(e.state(k));
  // sd of the frequency is about 0.001.
  CHECK(ones / 200000.0 == Approx(0.7).epsilon(0.01));
}

TEST_CASE("Markov stationary distribution and empirical frequencies") {
  // Two-state chain: pi = (b, a) / (a + b) with a = P(0->1), b = P(1->0).
  const double a = 0.1;
  const double b = 0.2;
  const auto m = EnvironmentModel::markov_stationary(two_poisson(), {{1 - a, a}, {b, 1 - b}});
  const auto pi = m.stationary();
  CHECK(pi[0] == Approx(b / (a + b)).epsilon(1e-10));
  CHECK(pi[1] == Approx(a / (a + b)).epsilon(1e-10));
  CHECK(m.log_growth_rate() ==
        Approx(pi[0] * std::log(1.5) + pi[1] * std::log(2.5)).epsilon(1e-12));
  const auto e = bpre::realize(m, 400000, 9);
  double ones = 0;
  std::size_t switches = 0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    ones += static_cast<double>(e.state(k));
    if (k > 0 && e.state(k) != e.state(k - 1)) ++switches;
  }
  CHECK(ones / 400000.0 == Approx(a / (a + b)).epsilon(0.03));
  // Switch rate 2ab / (a + b).
  CHECK(static_cast<double>(switches) / 400000.0 == Approx(2 * a * b / (a + b)).epsilon(0.03));
}

TEST_CASE("model predicates") {
  const auto geo = EnvironmentModel::iid(
      {OffspringLaw::geometric_shifted(0.4), OffspringLaw::geometric_shifted(0.5)}, {0.5, 0.5});
  CHECK(geo.strongly_supercritical());
  CHECK(geo.nondegenerate());
  CHECK(geo.finite_state());
  CHECK(geo.min_mean() == Approx(1.0 / 0.6));
  const auto pois = EnvironmentModel::constant(OffspringLaw::poisson(2.0));
  CHECK_FALSE(pois.strongly_supercritical());
  CHECK_FALSE(pois.finite_state());
  const auto point = EnvironmentModel::constant(OffspringLaw::finite({{2, 1.0}}));
  CHECK_FALSE(point.nondegenerate());
  // A state with zero weight is not possible and does not count.
  const auto masked = EnvironmentModel::iid(
      {OffspringLaw::poisson(2.0), OffspringLaw::geometric_shifted(0.5)}, {0.0, 1.0});
  CHECK(masked.strongly_supercritical());
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(EnvironmentModel::iid(two_poisson(), {0.5, 0.6}), bpre::InvalidArgument);
  CHECK_THROWS_AS(EnvironmentModel::iid(two_poisson(), {1.0}), bpre::InvalidArgument);
  CHECK_THROWS_AS(EnvironmentModel::markov_stationary(two_poisson(), {{0.5, 0.6}, {0.5, 0.5}}),
                  bpre::InvalidArgument);
  CHECK_THROWS_AS(EnvironmentModel::deterministic({}), bpre::InvalidArgument);
}
