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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bpre::stats {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 when count < 2
  double std_error = 0.0;
};

Moments moments(std::span<const double> x);

// Median by partial sort of a copy; the mean of the two middle values for
// even sizes.
double median(std::vector<double> x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  // Weighted residual sum of squares; with inverse-variance weights this is
  // the lack-of-fit chi-square on n - 2 degrees of freedom.
  double rss = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares y = intercept + slope x. Requires two distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Weighted least squares with weights w > 0. Standard errors assume the
// weights are inverse variances.
LinearFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                            std::span<const double> w);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for k successes in n trials at normal quantile z.
Interval wilson(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054);

// Upper-tail chi-square quantile: x with P(chi2_dof > x) = upper.
double chi2_upper_quantile(double dof, double upper);

// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b| of two sorted
// samples. Tied values are consumed together on both sides.
double ks_distance(std::span<const double> a_sorted,
                   std::span<const double> b_sorted);

// c(alpha) = sqrt(-ln(alpha / 2) / 2); c(0.01) = 1.6276.
double ks_coefficient(double alpha);

// Asymptotic rejection threshold c(alpha) sqrt((m + n) / (m n)).
double ks_threshold(std::size_t m, std::size_t n, double alpha = 0.01);

}  // namespace bpre::stats
