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

#include "bpre/engine.hpp"
#include "bpre/error.hpp"
#include "bpre/limits.hpp"
#include "bpre/stats.hpp"
#include "doctest.h"

using bpre::EnvironmentModel;
using bpre::OffspringLaw;
using doctest::Approx;

TEST_CASE("unit reproduction stays at one") {
  const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::finite({{1, 1.0}})), 5, 0);
  const auto t = bpre::simulate(env, 5, 1);
  REQUIRE(t.generations() == 5);
  for (std::size_t k = 0; k <= 5; ++k) {
    CHECK(t.z[k] == 1);
    CHECK(t.w[k] == 1.0);
    CHECK(t.log_p[k] == 0.0);
  }
}

TEST_CASE("binary splitting doubles exactly") {
  const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::finite({{2, 1.0}})), 10, 0);
  const auto t = bpre::simulate(env, 10, 3);
  CHECK(t.z[10] == 1024);
  CHECK(t.log_p[10] == Approx(10 * std::log(2.0)));
  CHECK(t.w[10] == Approx(1.0));
}

TEST_CASE("population cap truncates at the last complete generation") {
  const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::finite({{2, 1.0}})), 10, 0);
  const auto t = bpre::simulate(env, 10, 3, 100);
  CHECK(t.capped);
  CHECK(t.generations() == 6);
  CHECK(t.z.back() == 64);
  CHECK_THROWS_AS(bpre::estimate_W(env, t, 2), bpre::Error);
}

TEST_CASE("simulate is deterministic and extend continues the same path") {
  const auto env = bpre::realize(
      EnvironmentModel::iid({OffspringLaw::poisson(1.5), OffspringLaw::poisson(2.5)}, {0.5, 0.5}),
      30, 4);
  const auto a = bpre::simulate(env, 20, 77);
  const auto b = bpre::simulate(env, 20, 77);
  CHECK(a.z == b.z);
  auto c = bpre::simulate(env, 8, 77);
  bpre::extend(c, env, 12);
  CHECK(c.z == a.z);
  CHECK(c.w == a.w);
  const auto d = bpre::simulate(env, 20, 78);
  CHECK(d.z != a.z);
}

TEST_CASE("log P and W follow their definitions") {
  const auto env = bpre::realize(
      EnvironmentModel::deterministic({OffspringLaw::poisson(1.5), OffspringLaw::poisson(2.5)},
                                      bpre::Extension::kCyclic),
      12, 0);
  const auto t = bpre::simulate(env, 12, 5);
  double lp = 0.0;
  for (std::size_t k = 0; k <= 12; ++k) {
    CHECK(t.log_p[k] == Approx(lp).epsilon(1e-14));
    CHECK(t.w[k] == Approx(static_cast<double>(t.z[k]) * std::exp(-lp)).epsilon(1e-12));
    if (k < 12) lp += std::log(k % 2 == 0 ? 1.5 : 2.5);
  }
  CHECK(bpre::log_Pn(env, 12) == Approx(t.log_p[12]).epsilon(1e-14));
}

TEST_CASE("estimate_W reports the residual variance bound") {
  const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), 40, 0);
  const auto t = bpre::simulate(env, 5, 9);
  const auto e = bpre::estimate_W(env, t, 25);
  CHECK(e.base_generation == 5);
  CHECK(e.extra_depth == 25);
  // Constant Poisson(2): the tail from N is 2^-N.
  CHECK(e.residual_variance_bound == Approx(std::ldexp(1.0, -30)).epsilon(1e-9));
  CHECK(e.value >= 0.0);
}

TEST_CASE("sample_fluctuation does not depend on the worker count") {
  const auto env = bpre::realize(
      EnvironmentModel::iid({OffspringLaw::poisson(1.5), OffspringLaw::poisson(2.5)}, {0.5, 0.5}),
      40, 4);
  const auto one = bpre::sample_fluctuation(env, 6, 10, 300, 123, 1);
  const auto many = bpre::sample_fluctuation(env, 6, 10, 300, 123, 7);
  REQUIRE(one.size() == many.size());
  for (std::size_t r = 0; r < one.size(); ++r) {
    CHECK(one[r].w_n == many[r].w_n);
    CHECK(one[r].dw == many[r].dw);
  }
}

TEST_CASE("W_n is a martingale with the tail variance") {
  const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), 40, 0);
  const auto s = bpre::sample_fluctuation(env, 4, 20, 40000, 31, 0);
  std::vector<double> wn;
  std::vector<double> dw;
  for (const auto& p : s) {
    wn.push_back(p.w_n);
    dw.push_back(p.dw);
  }
  const auto mw = bpre::stats::moments(wn);
  const auto md = bpre::stats::moments(dw);
  CHECK(std::abs(mw.mean - 1.0) <= 4.0 * mw.std_error);
  CHECK(std::abs(md.mean) <= 4.0 * md.std_error);
  // Var(W_24 - W_4) = 2^-4 - 2^-24.
  CHECK(md.variance == Approx(std::ldexp(1.0, -4) - std::ldexp(1.0, -24)).epsilon(0.05));
}
