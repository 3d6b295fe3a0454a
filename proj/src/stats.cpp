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

#include "bpre/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "bpre/compensated_sum.hpp"
#include "bpre/error.hpp"

namespace bpre::stats {

Moments moments(std::span<const double> x) {
  Moments m;
  m.count = x.size();
  if (x.empty()) return m;
  // Welford.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double v : x) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  m.mean = mean;
  if (k >= 2) {
    m.variance = m2 / static_cast<double>(k - 1);
    m.std_error = std::sqrt(m.variance / static_cast<double>(k));
  }
  return m;
}

double median(std::vector<double> x) {
  if (x.empty()) throw InvalidArgument("median of an empty sample");
  const std::size_t mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  const double upper = x[mid];
  if (x.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::vector<double> w(x.size(), 1.0);
  LinearFit f = fit_line_weighted(x, y, w);
  // Unit weights: scale the standard errors by the residual variance.
  if (f.points > 2) {
    const double s2 = f.rss / static_cast<double>(f.points - 2);
    f.slope_se *= std::sqrt(s2);
    f.intercept_se *= std::sqrt(s2);
  } else {
    f.slope_se = 0.0;
    f.intercept_se = 0.0;
  }
  return f;
}

LinearFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                            std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) {
    throw InvalidArgument("fit_line: x, y and weights differ in length");
  }
  if (x.size() < 2) throw InvalidArgument("fit_line: need at least two points");
  CompensatedSum sw, swx, swy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0.0)) throw InvalidArgument("fit_line: weights must be > 0");
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
  }
  const double xbar = swx.value() / sw.value();
  const double ybar = swy.value() / sw.value();
  // Centered sums keep the slope exact for exactly linear data.
  CompensatedSum sxx, sxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - xbar;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (y[i] - ybar);
  }
  if (!(sxx.value() > 0.0)) throw InvalidArgument("fit_line: x values are all equal");
  LinearFit f;
  f.points = x.size();
  f.slope = sxy.value() / sxx.value();
  f.intercept = ybar - f.slope * xbar;
  CompensatedSum rss;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    rss += w[i] * r * r;
  }
  f.rss = rss.value();
  f.slope_se = std::sqrt(1.0 / sxx.value());
  f.intercept_se = std::sqrt(1.0 / sw.value() + xbar * xbar / sxx.value());
  return f;
}

Interval wilson(std::uint64_t k, std::uint64_t n, double z) {
  if (n == 0) throw InvalidArgument("wilson: n must be >= 1");
  if (k > n) throw InvalidArgument("wilson: k exceeds n");
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(k) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (p + z2 / (2.0 * nd)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
  // The bounds are exact at the ends of the range.
  return {k == 0 ? 0.0 : std::max(0.0, center - half), k == n ? 1.0 : std::min(1.0, center + half)};
}

double chi2_upper_quantile(double dof, double upper) {
  if (!(dof > 0.0)) throw InvalidArgument("chi2 quantile: dof must be > 0");
  if (!(upper > 0.0 && upper < 1.0)) {
    throw InvalidArgument("chi2 quantile: probability must be in (0, 1)");
  }
  const boost::math::chi_squared_distribution<double> chi2(dof);
  return boost::math::quantile(boost::math::complement(chi2, upper));
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_distance: empty sample");
  const double m = static_cast<double>(a.size());
  const double n = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n));
  }
  return d;
}

double ks_coefficient(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("ks_coefficient: alpha must be in (0, 1)");
  }
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

double ks_threshold(std::size_t m, std::size_t n, double alpha) {
  if (m == 0 || n == 0) throw InvalidArgument("ks_threshold: empty sample");
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return ks_coefficient(alpha) * std::sqrt((md + nd) / (md * nd));
}

}  // namespace bpre::stats
