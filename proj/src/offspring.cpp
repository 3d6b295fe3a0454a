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

#include "bpre/offspring.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "bpre/compensated_sum.hpp"
#include "bpre/distributions.hpp"
#include "bpre/error.hpp"

namespace bpre {
namespace {

constexpr double kNormTolerance = 1e-9;
constexpr double kTailRelTolerance = 1e-14;

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

void check_overflow_add(std::uint64_t& total, std::uint64_t value,
                        std::uint64_t count, std::uint64_t cap) {
  if (count == 0 || value == 0) return;
  const std::uint64_t room = cap - total;
  if (count > room / value) {
    throw PopulationOverflow("population exceeds cap", total);
  }
  total += value * count;
}

}  // namespace

OffspringLaw::OffspringLaw(Params params) : params_(std::move(params)) {}

OffspringLaw OffspringLaw::poisson(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("poisson: lambda must be finite and > 0");
  }
  OffspringLaw law(PoissonParams{lambda});
  law.mean_ = lambda;
  law.second_moment_ = lambda + lambda * lambda;
  law.p0_zero_ = false;
  law.degenerate_ = false;
  return law;
}

OffspringLaw OffspringLaw::geometric_shifted(double s) {
  if (!(s > 0.0 && s < 1.0)) {
    throw InvalidArgument("geometric_shifted: s must lie in (0, 1)");
  }
  OffspringLaw law(GeometricParams{s});
  law.mean_ = 1.0 / (1.0 - s);
  law.second_moment_ = (1.0 + s) / ((1.0 - s) * (1.0 - s));
  law.p0_zero_ = true;
  law.degenerate_ = false;
  return law;
}

OffspringLaw OffspringLaw::finite(
    std::vector<std::pair<std::uint64_t, double>> pmf) {
  std::map<std::uint64_t, double> merged;
  CompensatedSum total;
  for (const auto& [value, p] : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InvalidArgument("finite: probabilities must be finite and >= 0");
    }
    total += p;
    if (p > 0.0) merged[value] += p;
  }
  if (std::fabs(total.value() - 1.0) >= kNormTolerance) {
    throw InvalidArgument("finite: probabilities sum to " +
                          format_double(total.value()) + ", not 1");
  }
  FiniteTable table;
  for (const auto& [value, p] : merged) {
    table.values.push_back(value);
    table.probs.push_back(p / total.value());
  }
  std::ostringstream label;
  label << "finite{";
  for (std::size_t i = 0; i < table.values.size() && i < 8; ++i) {
    if (i) label << ",";
    label << table.values[i] << ":" << format_double(table.probs[i]);
  }
  if (table.values.size() > 8) label << ",...";
  label << "}";
  table.label = label.str();
  return from_table(std::move(table));
}

OffspringLaw OffspringLaw::power_tail(double exponent, std::uint64_t kmax) {
  if (!(exponent > 0.0) || !std::isfinite(exponent)) {
    throw InvalidArgument("power_tail: exponent must be finite and > 0");
  }
  if (kmax < 1 || kmax > 100'000'000) {
    throw InvalidArgument("power_tail: kmax must lie in [1, 1e8]");
  }
  FiniteTable table;
  table.values.resize(kmax);
  table.probs.resize(kmax);
  CompensatedSum norm;
  for (std::uint64_t k = kmax; k >= 1; --k) {
    const double w = std::pow(static_cast<double>(k), -exponent);
    table.values[k - 1] = k;
    table.probs[k - 1] = w;
    norm += w;
  }
  for (auto& p : table.probs) p /= norm.value();
  table.label = "power_tail(" + format_double(exponent) + "," +
                std::to_string(kmax) + ")";
  return from_table(std::move(table));
}

OffspringLaw OffspringLaw::from_table(FiniteTable table) {
  const std::size_t n = table.values.size();
  if (n == 0) throw InvalidArgument("finite: empty support");
  table.suffix.assign(n + 1, 0.0);
  CompensatedSum tail;
  for (std::size_t j = n; j-- > 0;) {
    tail += table.probs[j];
    table.suffix[j] = tail.value();
  }
  CompensatedSum m1;
  CompensatedSum m2;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = static_cast<double>(table.values[j]);
    m1 += v * table.probs[j];
    m2 += v * v * table.probs[j];
  }
  if (!(m1.value() > 0.0) || !std::isfinite(m1.value())) {
    throw InvalidArgument("finite: mean must lie in (0, inf)");
  }
  const bool p0_zero = table.values.front() != 0;
  const bool degenerate = n == 1;
  OffspringLaw law(std::make_shared<const FiniteTable>(std::move(table)));
  law.mean_ = m1.value();
  law.second_moment_ = m2.value();
  law.p0_zero_ = p0_zero;
  law.degenerate_ = degenerate;
  return law;
}

Family OffspringLaw::family() const noexcept {
  switch (params_.index()) {
    case 0:
      return Family::kPoisson;
    case 1:
      return Family::kGeometricShifted;
    default:
      return Family::kFinite;
  }
}

double OffspringLaw::parameter() const noexcept {
  if (const auto* p = std::get_if<PoissonParams>(&params_)) return p->lambda;
  if (const auto* g = std::get_if<GeometricParams>(&params_)) return g->s;
  return std::numeric_limits<double>::quiet_NaN();
}

double OffspringLaw::moment(double p) const {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw InvalidArgument("moment: order must be >= 1");
  }
  if (p == 1.0) return mean_;
  if (p == 2.0) return second_moment_;
  if (const auto* pp = std::get_if<PoissonParams>(&params_)) {
    const double lambda = pp->lambda;
    // term ratio ((k+1)/k)^p * lambda / (k+1)
    CompensatedSum sum;
    for (std::uint64_t k = 1; k < 50'000'000; ++k) {
      const double kd = static_cast<double>(k);
      const double term =
          std::exp(p * std::log(kd) + dist::log_poisson_pmf(kd, lambda));
      sum += term;
      const double r = std::pow((kd + 1.0) / kd, p) * lambda / (kd + 1.0);
      if (r < 1.0 && term * r / (1.0 - r) < kTailRelTolerance * sum.value()) {
        return sum.value();
      }
    }
    throw DivergenceError("moment: series did not converge");
  }
  if (const auto* g = std::get_if<GeometricParams>(&params_)) {
    const double s = g->s;
    const double log_s = std::log(s);
    const double log_1ms = std::log1p(-s);
    CompensatedSum sum;
    for (std::uint64_t k = 1; k < 50'000'000; ++k) {
      const double kd = static_cast<double>(k);
      const double term =
          std::exp(p * std::log(kd) + log_1ms + (kd - 1.0) * log_s);
      sum += term;
      const double r = std::pow((kd + 1.0) / kd, p) * s;
      if (r < 1.0 && term * r / (1.0 - r) < kTailRelTolerance * sum.value()) {
        return sum.value();
      }
    }
    throw DivergenceError("moment: series did not converge");
  }
  const auto& t = *std::get<2>(params_);
  CompensatedSum sum;
  for (std::size_t j = 0; j < t.values.size(); ++j) {
    if (t.values[j] == 0) continue;
    sum += std::pow(static_cast<double>(t.values[j]), p) * t.probs[j];
  }
  return sum.value();
}

double OffspringLaw::pgf(double s) const {
  if (!(s >= 0.0) || std::isnan(s)) {
    throw InvalidArgument("pgf: argument must be >= 0");
  }
  if (s == 1.0) return 1.0;
  if (const auto* pp = std::get_if<PoissonParams>(&params_)) {
    return std::exp(pp->lambda * (s - 1.0));
  }
  if (const auto* g = std::get_if<GeometricParams>(&params_)) {
    if (g->s * s >= 1.0) {
      throw DivergenceError("pgf: geometric series diverges at s = " +
                            format_double(s));
    }
    return (1.0 - g->s) * s / (1.0 - g->s * s);
  }
  const auto& t = *std::get<2>(params_);
  if (s == 0.0) return t.values.front() == 0 ? t.probs.front() : 0.0;
  CompensatedSum sum;
  for (std::size_t j = 0; j < t.values.size(); ++j) {
    sum += t.probs[j] * std::pow(s, static_cast<double>(t.values[j]));
  }
  return sum.value();
}

double OffspringLaw::pgf_minus_one(double u) const {
  if (!(u >= -1.0)) throw InvalidArgument("pgf_minus_one: argument must be >= -1");
  if (u == 0.0) return 0.0;
  if (const auto* pp = std::get_if<PoissonParams>(&params_)) {
    return std::expm1(pp->lambda * u);
  }
  if (const auto* g = std::get_if<GeometricParams>(&params_)) {
    if (g->s * (1.0 + u) >= 1.0) {
      throw DivergenceError("pgf: geometric series diverges at s = " +
                            format_double(1.0 + u));
    }
    // ((1 - s)(1 + u) - 1 + s (1 + u)) / (1 - s (1 + u)) = u / (1 - s - s u).
    return u / ((1.0 - g->s) - g->s * u);
  }
  const auto& t = *std::get<2>(params_);
  const double l = std::log1p(u);
  CompensatedSum sum;
  for (std::size_t j = 0; j < t.values.size(); ++j) {
    // s^0 - 1 = 0, also at u = -1 where 0 * log1p(u) is NaN.
    if (t.values[j] == 0) continue;
    sum += t.probs[j] * std::expm1(static_cast<double>(t.values[j]) * l);
  }
  return sum.value();
}

double OffspringLaw::prob(std::uint64_t i) const {
  if (const auto* pp = std::get_if<PoissonParams>(&params_)) {
    return std::exp(dist::log_poisson_pmf(static_cast<double>(i), pp->lambda));
  }
  if (const auto* g = std::get_if<GeometricParams>(&params_)) {
    if (i == 0) return 0.0;
    return (1.0 - g->s) * std::pow(g->s, static_cast<double>(i - 1));
  }
  const auto& t = *std::get<2>(params_);
  const auto it = std::lower_bound(t.values.begin(), t.values.end(), i);
  if (it == t.values.end() || *it != i) return 0.0;
  return t.probs[static_cast<std::size_t>(it - t.values.begin())];
}

std::vector<std::pair<std::uint64_t, double>> OffspringLaw::atoms() const {
  std::vector<std::pair<std::uint64_t, double>> out;
  if (const auto* t = std::get_if<2>(&params_)) {
    out.reserve((*t)->values.size());
    for (std::size_t j = 0; j < (*t)->values.size(); ++j) {
      out.emplace_back((*t)->values[j], (*t)->probs[j]);
    }
  }
  return out;
}

std::size_t OffspringLaw::support_size() const noexcept {
  if (const auto* t = std::get_if<2>(&params_)) return (*t)->values.size();
  return 0;
}

namespace {

// Index j in [first, size) with probability probs[j] / suffix[first].
std::size_t draw_from_suffix(const std::vector<double>& suffix,
                             std::size_t first, Rng& rng) {
  const std::size_t size = suffix.size() - 1;
  const double v = rng.uniform() * suffix[first];
  // Largest j with suffix[j] > v.
  std::size_t lo = first;
  std::size_t hi = size;  // suffix[size] = 0 <= v
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (suffix[mid] > v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

std::uint64_t OffspringLaw::sample_one(Rng& rng) const {
  if (const auto* pp = std::get_if<PoissonParams>(&params_)) {
    return dist::poisson(rng, pp->lambda);
  }
  if (const auto* g = std::get_if<GeometricParams>(&params_)) {
    return 1 + static_cast<std::uint64_t>(
                   std::floor(std::log(rng.uniform_open()) / std::log(g->s)));
  }
  const auto& t = *std::get<2>(params_);
  return t.values[draw_from_suffix(t.suffix, 0, rng)];
}

std::uint64_t OffspringLaw::sample_total(std::uint64_t z, Rng& rng,
                                         std::uint64_t cap) const {
  if (z == 0) return 0;
  const double cap_d = static_cast<double>(cap);
  if (const auto* pp = std::get_if<PoissonParams>(&params_)) {
    const double k = dist::poisson_real(rng, static_cast<double>(z) * pp->lambda);
    if (k > cap_d) {
      throw PopulationOverflow("population exceeds cap", cap);
    }
    return static_cast<std::uint64_t>(k);
  }
  if (const auto* g = std::get_if<GeometricParams>(&params_)) {
    if (z > cap) throw PopulationOverflow("population exceeds cap", cap);
    const double extra = dist::negative_binomial_real(rng, z, 1.0 - g->s);
    if (extra > static_cast<double>(cap - z)) {
      throw PopulationOverflow("population exceeds cap", z);
    }
    return z + static_cast<std::uint64_t>(extra);
  }
  return finite_total(*std::get<2>(params_), z, rng, cap);
}

// Sequential binomial splitting over the support: the number of parents
// with value v_k is Binomial(remaining, p_k / suffix_k). Once the expected
// count at the current atom drops below a third, the remaining parents are
// drawn individually from the conditional tail instead (one binomial step
// costs about a third of one table search); both routes are exact.
std::uint64_t OffspringLaw::finite_total(const FiniteTable& t, std::uint64_t z,
                                         Rng& rng, std::uint64_t cap) const {
  const std::size_t size = t.values.size();
  std::uint64_t remaining = z;
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < size && remaining > 0; ++k) {
    if (k + 1 == size) {
      check_overflow_add(total, t.values[k], remaining, cap);
      remaining = 0;
      break;
    }
    const double q = std::clamp(t.probs[k] / t.suffix[k], 0.0, 1.0);
    if (3.0 * static_cast<double>(remaining) * q < 1.0) {
      for (; remaining > 0; --remaining) {
        const std::size_t j = draw_from_suffix(t.suffix, k, rng);
        check_overflow_add(total, t.values[j], 1, cap);
      }
      break;
    }
    const std::uint64_t count = dist::binomial(rng, remaining, q);
    check_overflow_add(total, t.values[k], count, cap);
    remaining -= count;
  }
  return total;
}

std::string OffspringLaw::describe() const {
  if (const auto* pp = std::get_if<PoissonParams>(&params_)) {
    return "poisson(" + format_double(pp->lambda) + ")";
  }
  if (const auto* g = std::get_if<GeometricParams>(&params_)) {
    return "geometric_shifted(" + format_double(g->s) + ")";
  }
  return std::get<2>(params_)->label;
}

bool OffspringLaw::operator==(const OffspringLaw& other) const {
  if (params_.index() != other.params_.index()) return false;
  if (const auto* pp = std::get_if<PoissonParams>(&params_)) {
    return pp->lambda == std::get<PoissonParams>(other.params_).lambda;
  }
  if (const auto* g = std::get_if<GeometricParams>(&params_)) {
    return g->s == std::get<GeometricParams>(other.params_).s;
  }
  const auto& a = *std::get<2>(params_);
  const auto& b = *std::get<2>(other.params_);
  return &a == &b || (a.values == b.values && a.probs == b.probs);
}

}  // namespace bpre
