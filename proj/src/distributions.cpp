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

#include "bpre/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "bpre/error.hpp"

namespace bpre::dist {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))
constexpr double kSmallMean = 10.0;

double poisson_inversion(Rng& rng, double mean) {
  for (;;) {
    const double u = rng.uniform();
    double k = 0.0;
    double p = std::exp(-mean);
    double cdf = p;
    while (u > cdf) {
      k += 1.0;
      p *= mean / k;
      cdf += p;
      if (p == 0.0 && k > mean) break;  // rounding left cdf just below u
    }
    if (u <= cdf) return k;
  }
}

// PTRS, valid for mean >= 10.
double poisson_ptrs(Rng& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double log_inv_alpha = std::log(1.1239 + 1.1328 / (b - 3.4));
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    if (us <= 0.0) continue;
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + log_inv_alpha - std::log(a / (us * us) + b) <=
        log_poisson_pmf(k, mean)) {
      return k;
    }
  }
}

// Sequential search from zero; p <= 1/2 and trials * p < 10.
double binomial_inversion(Rng& rng, std::uint64_t trials, double p) {
  const double n = static_cast<double>(trials);
  const double q = 1.0 - p;
  const double s = p / q;
  const double a = (n + 1.0) * s;
  const double p0 = std::exp(n * std::log1p(-p));
  for (;;) {
    double u = rng.uniform();
    double r = p0;
    double k = 0.0;
    bool ok = true;
    while (u > r) {
      u -= r;
      k += 1.0;
      if (k > n) {
        ok = false;
        break;
      }
      r *= a / k - s;
      if (r <= 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) return k;
  }
}

// BTRS, valid for p <= 1/2 and trials * p >= 10.
double binomial_btrs(Rng& rng, std::uint64_t trials, double p) {
  const double n = static_cast<double>(trials);
  const double spq = std::sqrt(n * p * (1.0 - p));
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = n * p + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double mode = std::floor((n + 1.0) * p);
  const double log_f_mode = log_binomial_pmf(mode, n, p);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    if (us <= 0.0) continue;
    const double k = std::floor((2.0 * a / us + b) * u + c);
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0.0 || k > n) continue;
    v = std::log(v * alpha / (a / (us * us) + b));
    if (v <= log_binomial_pmf(k, n, p) - log_f_mode) return k;
  }
}

}  // namespace

double normal(Rng& rng) {
  for (;;) {
    const double x = 2.0 * rng.uniform() - 1.0;
    const double y = 2.0 * rng.uniform() - 1.0;
    const double r2 = x * x + y * y;
    if (r2 > 0.0 && r2 < 1.0) {
      return x * std::sqrt(-2.0 * std::log(r2) / r2);
    }
  }
}

double gamma(Rng& rng, double shape) {
  if (!(shape >= 1.0)) throw InvalidArgument("gamma: shape must be >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double e;  // v - 1
    do {
      x = normal(rng);
      const double cx = c * x;
      e = cx * (3.0 + cx * (3.0 + cx));
    } while (e <= -1.0);
    const double v = 1.0 + e;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    // log v + 1 - v == log1pmx(e)
    if (std::log(u) < 0.5 * x2 + d * log1pmx(e)) return d * v;
  }
}

double poisson_real(Rng& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw InvalidArgument("poisson: mean must be finite and >= 0");
  }
  if (mean == 0.0) return 0.0;
  return mean < kSmallMean ? poisson_inversion(rng, mean)
                           : poisson_ptrs(rng, mean);
}

std::uint64_t poisson(Rng& rng, double mean) {
  if (mean >= 0x1.0p63) throw InvalidArgument("poisson: mean too large");
  return static_cast<std::uint64_t>(poisson_real(rng, mean));
}

std::uint64_t binomial(Rng& rng, std::uint64_t trials, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument("binomial: p must lie in [0, 1]");
  }
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  if (p > 0.5) return trials - binomial(rng, trials, 1.0 - p);
  const double mean = static_cast<double>(trials) * p;
  const double k = mean < kSmallMean ? binomial_inversion(rng, trials, p)
                                     : binomial_btrs(rng, trials, p);
  const auto result = static_cast<std::uint64_t>(k);
  return result > trials ? trials : result;
}

double negative_binomial_real(Rng& rng, std::uint64_t successes,
                              double p_success) {
  if (!(p_success > 0.0 && p_success <= 1.0)) {
    throw InvalidArgument("negative_binomial: p must lie in (0, 1]");
  }
  if (successes == 0 || p_success == 1.0) return 0.0;
  const double q = 1.0 - p_success;
  if (successes <= 8) {
    // Direct sum of geometric failure counts by inversion.
    const double log_q = std::log(q);
    double total = 0.0;
    for (std::uint64_t i = 0; i < successes; ++i) {
      total += std::floor(std::log(rng.uniform_open()) / log_q);
    }
    return total;
  }
  const double rate = gamma(rng, static_cast<double>(successes)) * q / p_success;
  return poisson_real(rng, rate);
}

double log1pmx(double x) {
  if (std::fabs(x) > 1e-2) return std::log1p(x) - x;
  // -x^2/2 + x^3/3 - x^4/4 + ...
  double term = -x * x;
  double sum = 0.0;
  for (int j = 2; j < 40; ++j) {
    const double add = term / j;
    sum += add;
    if (std::fabs(add) <= 1e-18 * std::fabs(sum)) break;
    term *= -x;
  }
  return sum;
}

double stirling_error(double n) {
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  if (n <= 0.0) return 0.0;
  if (n <= 15.0) {
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - kLogSqrt2Pi;
  }
  const double nn = n * n;
  if (n > 500.0) return (s0 - s1 / nn) / n;
  if (n > 80.0) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35.0) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

double deviance(double x, double np) {
  if (x == 0.0) return np;
  if (std::fabs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

double log_poisson_pmf(double k, double mean) {
  if (k < 0.0) return -std::numeric_limits<double>::infinity();
  if (mean == 0.0) return k == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (k == 0.0) return -mean;
  return -stirling_error(k) - deviance(k, mean) - kLogSqrt2Pi -
         0.5 * std::log(k);
}

double log_binomial_pmf(double k, double trials, double p) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (k < 0.0 || k > trials) return kNegInf;
  const double q = 1.0 - p;
  if (p == 0.0) return k == 0.0 ? 0.0 : kNegInf;
  if (q == 0.0) return k == trials ? 0.0 : kNegInf;
  if (k == 0.0) return trials * std::log1p(-p);
  if (k == trials) return trials * std::log(p);
  const double rest = trials - k;
  const double lc = stirling_error(trials) - stirling_error(k) -
                    stirling_error(rest) - deviance(k, trials * p) -
                    deviance(rest, trials * q);
  const double lf = 2.0 * kLogSqrt2Pi + std::log(k) + std::log1p(-k / trials);
  return lc - 0.5 * lf;
}

}  // namespace bpre::dist
