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

#include <algorithm>
#include <cmath>
#include <vector>

#include "bpre/error.hpp"
#include "bpre/limits.hpp"
#include "doctest.h"

using bpre::EnvironmentModel;
using bpre::OffspringLaw;
using doctest::Approx;

namespace {

// sum_{n < terms} P_n^-1 (m_n(2) / m_n^2 - 1) by plain long-double summation.
double delta2_oracle(const bpre::EnvironmentSequence& env, std::size_t from, std::size_t terms) {
  const auto e = env.extended(from + terms);
  long double p = 1.0L;
  long double sum = 0.0L;
  for (std::size_t n = 0; n < from + terms; ++n) {
    const auto& law = e.law(n);
    const long double m = law.mean();
    if (n >= from) sum += (law.second_moment() / (m * m) - 1.0L) / p;
    p *= m;
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("variance series of constant laws equals one") {
  for (const auto& law : {OffspringLaw::poisson(2.0), OffspringLaw::geometric_shifted(0.5)}) {
    const auto env = bpre::realize(EnvironmentModel::constant(law), 10, 0);
    const auto s = bpre::delta2_partial(env);
    CHECK(s.converged());
    CHECK_FALSE(s.degenerate());
    CHECK(s.limit() == Approx(1.0).epsilon(1e-9));
    CHECK(s.limit() == Approx(delta2_oracle(env, 0, 400)).epsilon(1e-12));
  }
}

TEST_CASE("constant Poisson(lambda): delta^2 = 1 / (lambda - 1)") {
  for (double lambda : {1.25, 3.0, 10.0}) {
    const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::poisson(lambda)), 4, 0);
    CHECK(bpre::delta2_partial(env).limit() == Approx(1.0 / (lambda - 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("varying environment against direct summation") {
  const auto m = EnvironmentModel::deterministic(
      {OffspringLaw::poisson(1.5), OffspringLaw::geometric_shifted(0.3),
       OffspringLaw::finite({{1, 0.5}, {4, 0.5}})},
      bpre::Extension::kCyclic);
  const auto env = bpre::realize(m, 3, 0);
  CHECK(bpre::delta2_partial(env).limit() == Approx(delta2_oracle(env, 0, 600)).epsilon(1e-12));
}

TEST_CASE("tail_from agrees with the shifted series rescaled by P_n") {
  const auto m = EnvironmentModel::iid({OffspringLaw::poisson(1.5), OffspringLaw::poisson(2.5)},
                                       {0.5, 0.5});
  const auto env = bpre::realize(m, 64, 17);
  const auto s = bpre::delta2_partial(env);
  for (std::size_t n : {0u, 1u, 7u, 30u}) {
    const double d = bpre::delta2_shifted(env, n);
    const double via_tail = s.tail_from(n) * std::exp(bpre::log_Pn(env, n));
    CHECK(d * d == Approx(via_tail).epsilon(1e-10));
    CHECK(s.tail_from(n) == Approx(delta2_oracle(env, n, 600)).epsilon(1e-11));
    CHECK(bpre::delta2_tail(env, n) == Approx(s.tail_from(n)).epsilon(1e-12));
  }
}

TEST_CASE("degenerate and divergent series") {
  const auto point = bpre::realize(EnvironmentModel::constant(OffspringLaw::finite({{2, 1.0}})), 4, 0);
  const auto s = bpre::delta2_partial(point);
  CHECK(s.degenerate());
  CHECK(s.limit() == 0.0);
  CHECK_THROWS_AS(bpre::delta2_shifted(point, 1), bpre::DegenerateError);
  // Critical law: P_n = 1, every term equal.
  const auto critical = bpre::realize(EnvironmentModel::constant(OffspringLaw::poisson(1.0)), 4, 0);
  CHECK_THROWS_AS(bpre::delta2_partial(critical), bpre::DivergenceError);
}

TEST_CASE("log_Pn requires a long enough environment") {
  const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), 5, 0);
  CHECK(bpre::log_Pn(env, 5) == Approx(5 * std::log(2.0)));
  CHECK_THROWS_AS(bpre::log_Pn(env, 6), bpre::HorizonError);
}

TEST_CASE("u_statistic formula") {
  const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), 10, 0);
  // delta_inf(T^n xi) = 1 for constant Poisson(2); P_4 = 16.
  CHECK(bpre::u_statistic(env, 4, 1.0, 1.25) == Approx(4.0 * 0.25));
  CHECK(bpre::u_statistic(std::log(16.0), 2.0, 1.0, 1.25) == Approx(0.5));
}

TEST_CASE("extinction probability by backward composition") {
  // q = 1/4 + 3/4 q^2 has smallest root 1/3.
  const auto env = bpre::realize(
      EnvironmentModel::constant(OffspringLaw::finite({{0, 0.25}, {2, 0.75}})), 200, 0);
  const auto e = bpre::extinction_prob(env, 200);
  CHECK(e.value == Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(std::abs(e.last_increment) < 1e-12);
  // Poisson(2): root of q = exp(2 (q - 1)) by bisection.
  double lo = 0.0;
  double hi = 0.9;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::exp(2.0 * (mid - 1.0)) - mid > 0.0 ? lo : hi) = mid;
  }
  const auto p = bpre::realize(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), 300, 0);
  CHECK(bpre::extinction_prob(p, 300).value == Approx(lo).epsilon(1e-10));
  // No extinction without p_0.
  const auto g = bpre::realize(EnvironmentModel::constant(OffspringLaw::geometric_shifted(0.5)), 50, 0);
  CHECK(bpre::extinction_prob(g, 50).value == 0.0);
}

TEST_CASE("quenched mgf of an exponential limit") {
  // GeometricShifted(0.5) has W ~ Exp(1), so E exp(t W) = 1 / (1 - t).
  const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::geometric_shifted(0.5)), 10, 0);
  for (double t : {0.0, 0.25, 0.5, 0.9}) {
    CHECK(bpre::quenched_mgf(env, t, 1000) == Approx(1.0 / (1.0 - t)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(bpre::quenched_mgf(env, 1.5, 1000), bpre::DivergenceError);
  CHECK_THROWS_AS(bpre::quenched_mgf(env, -0.5, 10), bpre::InvalidArgument);
  // psi_0(t) = e^t.
  CHECK(bpre::quenched_mgf(env, 0.3, 0) == Approx(std::exp(0.3)));
}

TEST_CASE("quenched mgf with an extinction atom") {
  // psi_1(t) = phi(e^(t/m)) for one generation of {0: 1/4, 2: 3/4}, m = 3/2.
  const auto law = OffspringLaw::finite({{0, 0.25}, {2, 0.75}});
  const auto env = bpre::realize(EnvironmentModel::constant(law), 4, 0);
  const double t = 0.3;
  CHECK(bpre::quenched_mgf(env, t, 1) ==
        Approx(0.25 + 0.75 * std::exp(2.0 * t / 1.5)).epsilon(1e-13));
}

TEST_CASE("limit law sample is sorted, reproducible and has variance E W") {
  const auto env = bpre::realize(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), 40, 0);
  const auto a = bpre::limit_law_sample(env, 20000, 20, 5, 1);
  const auto b = bpre::limit_law_sample(env, 20000, 20, 5, 4);
  CHECK(a.sample == b.sample);
  CHECK(std::is_sorted(a.sample.begin(), a.sample.end()));
  double s2 = 0.0;
  for (double v : a.sample) s2 += v * v;
  // E G^2 W = E W = 1; Var(G^2 W) = 3 E W^2 - 1 = 5.
  CHECK(std::abs(s2 / 20000.0 - 1.0) < 4.0 * std::sqrt(5.0 / 20000.0));
  CHECK(a.kind == bpre::LimitKind::kPhi2Sample);
  CHECK(a.to_json().contains("sample_size"));
}
