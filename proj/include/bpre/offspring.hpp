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

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bpre/rng.hpp"

namespace bpre {

// Default hard cap on any population count.
inline constexpr std::uint64_t kDefaultPopulationCap = std::uint64_t{1} << 62;

enum class Family { kPoisson, kGeometricShifted, kFinite };

// One reproduction law p(xi_n) = {p_i : i >= 0}.
//
// Three families are supported, all closed under convolution in the sense
// that the total offspring of z parents can be drawn in O(1) (Poisson,
// shifted geometric) or in time independent of z (finite support):
//
//   Poisson(lambda)           P(k) = e^-lambda lambda^k / k!,  k >= 0
//   GeometricShifted(s)       P(k) = (1 - s) s^(k - 1),        k >= 1
//   Finite{(v_j, p_j)}        P(v_j) = p_j
//
// Laws are immutable; copies share the finite-support tables.
class OffspringLaw {
 public:
  static OffspringLaw poisson(double lambda);
  static OffspringLaw geometric_shifted(double s);
  // Probabilities must sum to 1 within 1e-9; they are then renormalized.
  // Duplicate values are merged and zero-probability atoms dropped.
  static OffspringLaw finite(
      std::vector<std::pair<std::uint64_t, double>> pmf);
  // P(k) proportional to k^-exponent on {1, ..., kmax}.
  static OffspringLaw power_tail(double exponent, std::uint64_t kmax);

  Family family() const noexcept;
  // Poisson lambda or geometric s; NaN for finite laws.
  double parameter() const noexcept;

  double mean() const noexcept { return mean_; }
  double second_moment() const noexcept { return second_moment_; }
  // m(p) = sum_i i^p p_i for p >= 1.
  double moment(double p) const;
  // Probability generating function. Arguments above 1 are allowed where
  // the series converges; DivergenceError otherwise.
  double pgf(double s) const;
  // phi(1 + u) - 1 for u >= -1, accurate when u is tiny. Same divergence
  // rule as pgf.
  double pgf_minus_one(double u) const;
  // p_i.
  double prob(std::uint64_t i) const;

  bool p0_zero() const noexcept { return p0_zero_; }
  bool degenerate() const noexcept { return degenerate_; }

  // Finite-support atoms in increasing value order; empty for other families.
  std::vector<std::pair<std::uint64_t, double>> atoms() const;
  std::size_t support_size() const noexcept;

  std::uint64_t sample_one(Rng& rng) const;
  // One draw of the sum of z independent copies. Throws PopulationOverflow
  // if the total exceeds `cap`.
  std::uint64_t sample_total(std::uint64_t z, Rng& rng,
                             std::uint64_t cap = kDefaultPopulationCap) const;

  std::string describe() const;

  bool operator==(const OffspringLaw& other) const;

 private:
  struct PoissonParams {
    double lambda;
  };
  struct GeometricParams {
    double s;
  };
  struct FiniteTable {
    std::vector<std::uint64_t> values;
    std::vector<double> probs;
    // suffix[j] = sum_{i >= j} probs[i]; suffix[size] = 0.
    std::vector<double> suffix;
    std::string label;
  };
  using Params =
      std::variant<PoissonParams, GeometricParams,
                   std::shared_ptr<const FiniteTable>>;

  explicit OffspringLaw(Params params);
  static OffspringLaw from_table(FiniteTable table);
  std::uint64_t finite_total(const FiniteTable& t, std::uint64_t z, Rng& rng,
                             std::uint64_t cap) const;

  Params params_;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
  bool p0_zero_ = false;
  bool degenerate_ = false;
};

}  // namespace bpre
