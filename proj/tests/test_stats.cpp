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

#include "bpre/error.hpp"
#include "bpre/stats.hpp"
#include "doctest.h"

namespace st = bpre::stats;
using doctest::Approx;

TEST_CASE("moments and median") {
  const std::vector<double> x = {1, 2, 3, 4, 10};
  const auto m = st::moments(x);
  CHECK(m.mean == Approx(4.0));
  CHECK(m.variance == Approx(12.5));
  CHECK(m.std_error == Approx(std::sqrt(12.5 / 5)));
  CHECK(st::median(x) == 3.0);
  CHECK(st::median({4, 1, 3, 2}) == 2.5);
  CHECK_THROWS_AS(st::median({}), bpre::InvalidArgument);
}

TEST_CASE("least squares recovers an exact line") {
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 4; i <= 14; ++i) {
    x.push_back(i);
    y.push_back(0.3 - std::log(2.0) * i);
  }
  const auto f = st::fit_line(x, y);
  CHECK(std::abs(f.slope + std::log(2.0)) < 1e-14);
  CHECK(f.intercept == Approx(0.3).epsilon(1e-12));
  CHECK(f.rss < 1e-25);
}

TEST_CASE("weighted least squares against normal equations") {
  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<double> y = {1, 3, 2, 5};
  const std::vector<double> w = {1, 2, 1, 4};
  // Normal equations solved by hand: Sw = 8, Swx = 16, Swxx = 42, Swy = 29, Swxy = 70.
  const double det = 8 * 42 - 16 * 16;
  const auto f = st::fit_line_weighted(x, y, w);
  CHECK(f.slope == Approx((8 * 70 - 16 * 29) / det));
  CHECK(f.intercept == Approx((42 * 29 - 16 * 70) / det));
}

TEST_CASE("Wilson interval") {
  // 10 of 100 at 95%: [0.0552, 0.1744].
  const auto ci = st::wilson(10, 100);
  CHECK(ci.lo == Approx(0.05522914).epsilon(1e-6));
  CHECK(ci.hi == Approx(0.17436566).epsilon(1e-6));
  CHECK(st::wilson(0, 50).lo == 0.0);
}

TEST_CASE("chi-square quantiles") {
  CHECK(st::chi2_upper_quantile(1, 0.05) == Approx(3.841458820694124).epsilon(1e-12));
  CHECK(st::chi2_upper_quantile(5, 0.01) == Approx(15.08627246938899).epsilon(1e-12));
}

TEST_CASE("KS distance") {
  const std::vector<double> a = {1, 2, 3, 4};
  CHECK(st::ks_distance(a, a) == 0.0);
  const std::vector<double> b = {5, 6, 7};
  CHECK(st::ks_distance(a, b) == 1.0);
  const std::vector<double> c = {1, 2};
  CHECK(st::ks_distance(a, c) == Approx(0.5));
  // Ties are consumed together.
  const std::vector<double> t1 = {0, 0, 1, 1};
  const std::vector<double> t2 = {0, 1, 1, 1};
  CHECK(st::ks_distance(t1, t2) == Approx(0.25));
}

TEST_CASE("KS threshold") {
  CHECK(st::ks_coefficient(0.01) == Approx(1.6276).epsilon(1e-4));
  CHECK(st::ks_threshold(20000, 20000) == Approx(1.6276 * std::sqrt(2.0 / 20000)).epsilon(1e-4));
}
