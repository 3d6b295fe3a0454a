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
#include <string>
#include <vector>

#include "bpre/error.hpp"
#include "bpre/verify.hpp"
#include "doctest.h"

using bpre::EnvironmentModel;
using bpre::OffspringLaw;
using doctest::Approx;

namespace {

const bpre::Criterion* find(const bpre::VerificationReport& r, const std::string& name) {
  for (const auto& c : r.criteria) {
    if (c.name.find(name) != std::string::npos) return &c;
  }
  return nullptr;
}

std::vector<bpre::TailCounts> cells_from(const std::vector<double>& p, std::uint64_t reps) {
  std::vector<bpre::TailCounts> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.push_back({i + 2, 0.1, static_cast<std::uint64_t>(std::llround(p[i] * reps)), reps});
  }
  return out;
}

}  // namespace

TEST_CASE("rate targets") {
  const auto t = bpre::RateTarget::exponential(std::log(2.0), 2.0);
  CHECK(t.q == Approx(2.0));
  CHECK(t.expected_slope(bpre::RateStatistic::kMeanAbs) == Approx(-std::log(2.0) / 2));
  CHECK(t.expected_slope(bpre::RateStatistic::kMeanSquare) == Approx(-std::log(2.0)));
  CHECK(bpre::RateTarget::exponential(1.0, 1.5).q == Approx(3.0));
  CHECK_THROWS_AS(bpre::RateTarget::exponential(1.0, 2.5), bpre::InvalidArgument);
  CHECK_THROWS_AS(bpre::RateTarget::exponential(-1.0, 2.0), bpre::InvalidArgument);
  CHECK(bpre::rate_statistic_from_string("median_abs") == bpre::RateStatistic::kMedianAbs);
}

TEST_CASE("assess_rate recovers an exact exponential slope") {
  bpre::RateConfig cfg;
  cfg.target = bpre::RateTarget::exponential(std::log(2.0), 2.0);
  cfg.statistic = bpre::RateStatistic::kMeanSquare;
  cfg.two_sided = true;
  std::vector<std::size_t> n;
  std::vector<double> v;
  for (std::size_t i = 4; i <= 14; ++i) {
    n.push_back(i);
    v.push_back(3.0 * std::exp(-std::log(2.0) * static_cast<double>(i)));
  }
  const auto r = bpre::assess_rate(n, v, cfg);
  CHECK(r.passed());
  CHECK(std::abs(r.fits["slope"].get<double>() + std::log(2.0)) < 1e-12);
  // Twice as slow fails the one-sided bound.
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-0.5 * std::log(2.0) * n[i]);
  CHECK_FALSE(bpre::assess_rate(n, v, cfg).passed());
}

TEST_CASE("assess_rate polynomial criterion") {
  bpre::RateConfig cfg;
  cfg.target = bpre::RateTarget::polynomial(1.0);
  std::vector<std::size_t> n;
  std::vector<double> dec;
  std::vector<double> flat;
  for (std::size_t i = 4; i <= 20; ++i) {
    n.push_back(i);
    dec.push_back(std::pow(static_cast<double>(i), -1.5));
    flat.push_back(1.0 / static_cast<double>(i));
  }
  CHECK(bpre::assess_rate(n, dec, cfg).passed());
  CHECK_FALSE(bpre::assess_rate(n, flat, cfg).passed());
}

TEST_CASE("analyze_tail: exact geometric is not supergeometric") {
  bpre::TailConfig cfg;
  std::vector<double> p;
  for (int k = 2; k <= 8; ++k) p.push_back(std::ldexp(1.0, -k));
  const auto a = bpre::analyze_tail(cells_from(p, 1'000'000), std::log(1.5), cfg);
  CHECK_FALSE(a.geometric_rejected);
  CHECK_FALSE(a.supergeometric);
}

TEST_CASE("analyze_tail: double-exponential decay is flagged") {
  bpre::TailConfig cfg;
  std::vector<double> p;
  // log(-log p) = (n / 3) log 2.
  for (int k = 2; k <= 8; ++k) p.push_back(std::exp(-std::exp2(k / 3.0)));
  const auto a = bpre::analyze_tail(cells_from(p, 100'000'000), std::log(2.0), cfg);
  CHECK(a.increasing);
  CHECK(a.mean_increment == Approx(std::log(2.0) / 3).epsilon(1e-3));
  CHECK(a.supergeometric);
}

TEST_CASE("analyze_tail censors sparse cells") {
  bpre::TailConfig cfg;
  std::vector<bpre::TailCounts> cells = {{2, 0.1, 500, 1000}, {3, 0.1, 5, 1000},
                                         {4, 0.1, 1000, 1000}};
  const auto a = bpre::analyze_tail(cells, std::log(2.0), cfg);
  CHECK_FALSE(a.censored[0]);
  CHECK(a.censored[1]);
  CHECK(a.censored[2]);
  CHECK(std::isnan(a.y[1]));
}

TEST_CASE("hypotheses are enforced") {
  bpre::CampaignOptions o;
  bpre::TailConfig tail;
  tail.n_list = {2, 3};
  tail.eps_list = {0.1};
  tail.reps = 100;
  // Poisson has p_0 > 0.
  CHECK_THROWS_AS(bpre::check_tail(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), tail, o),
                  bpre::HypothesisError);
  bpre::CltConfig clt;
  clt.n_list = {2};
  clt.reps = 100;
  CHECK_THROWS_AS(
      bpre::check_clt(EnvironmentModel::constant(OffspringLaw::finite({{2, 1.0}})), clt, o),
      bpre::HypothesisError);
  bpre::RateConfig rate;
  rate.n_list = {2, 3};
  rate.reps = 10;
  CHECK_THROWS_AS(bpre::check_rate(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), rate, o),
                  bpre::InvalidArgument);
}

TEST_CASE("rate campaign rejects an estimator that is too shallow") {
  bpre::CampaignOptions o;
  o.extra_depth = 2;
  bpre::RateConfig rate;
  rate.target = bpre::RateTarget::exponential(std::log(2.0), 2.0);
  rate.n_list = {2, 3, 4};
  rate.reps = 1000;
  CHECK_THROWS_AS(bpre::check_rate(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), rate, o),
                  bpre::EstimatorInvalid);
}

TEST_CASE("mgf probe verdicts") {
  const auto env =
      bpre::realize(EnvironmentModel::constant(OffspringLaw::geometric_shifted(0.5)), 10, 0);
  const auto stable = bpre::probe_mgf(env, 0.5, 1000);
  CHECK(stable.verdict == bpre::MgfVerdict::kStable);
  CHECK(stable.value == Approx(2.0).epsilon(1e-9));
  CHECK(bpre::probe_mgf(env, 1.5, 1000).verdict == bpre::MgfVerdict::kDivergent);
  CHECK(bpre::to_string(bpre::MgfVerdict::kUnresolved) == "unresolved");
}

TEST_CASE("clt campaign is independent of the worker count") {
  const auto m = EnvironmentModel::iid({OffspringLaw::poisson(1.5), OffspringLaw::poisson(2.5)},
                                       {0.5, 0.5});
  bpre::CltConfig cfg;
  cfg.n_list = {3, 5};
  cfg.reps = 2000;
  bpre::CampaignOptions a;
  a.seed = 3;
  a.env_seed = 4;
  a.workers = 1;
  bpre::CampaignOptions b = a;
  b.workers = 6;
  const auto ra = bpre::check_clt(m, cfg, a);
  const auto rb = bpre::check_clt(m, cfg, b);
  CHECK(ra.stats_csv() == rb.stats_csv());
}

TEST_CASE("report serialization") {
  bpre::VerificationReport r;
  r.campaign = "x";
  r.columns = {"n", "v"};
  r.rows = {{1, 0.1}, {2, 1.0 / 3.0}};
  CHECK(r.passed());
  r.add({"c", 1.0, 2.0, "<=", true, ""});
  CHECK(r.passed());
  r.add({"d", 3.0, 2.0, "<=", false, ""});
  CHECK_FALSE(r.passed());
  CHECK(r.stats_csv() == "n,v\n1,0.10000000000000001\n2,0.33333333333333331\n");
  const auto j = r.to_json();
  CHECK(j["schema_version"] == bpre::kReportSchemaVersion);
  CHECK(j["criteria"].size() == 2);
  CHECK(j["passed"] == false);
  r.criteria.clear();
  r.degenerate = true;
  CHECK_FALSE(r.passed());
}

TEST_CASE("sampler equivalence on small z") {
  const std::vector<OffspringLaw> laws = {OffspringLaw::poisson(2.0),
                                          OffspringLaw::finite({{0, 0.25}, {2, 0.75}})};
  const auto s = bpre::sampler_equivalence(laws, 10, 2000, 8, 0);
  CHECK(s.trials == 20);
  CHECK(s.pass);
}
