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
#include <optional>
#include <string>
#include <vector>

#include "bpre/environment.hpp"
#include "json.hpp"

namespace bpre {

// log P_n = sum_{i<n} log m_i, compensated. Requires n <= env.size().
double log_Pn(const EnvironmentSequence& env, std::size_t n);

inline constexpr std::size_t kMaxSeriesTerms = 10'000;

// Partial sums of the quenched variance series
//
//   delta^2_inf(xi) = sum_{n >= 0} P_n^-1 (m_n(2) / m_n^2 - 1).
//
// Summation stops once five consecutive terms each change the sum by less
// than 1e-12 relative, or after `n_terms` terms. The environment is extended
// from its origin model as needed, so the full infinite sequence is seen.
class VarianceSeries {
 public:
  const std::vector<double>& partials() const noexcept { return partials_; }
  double limit() const noexcept;
  bool converged() const noexcept { return converged_; }
  // All terms vanish: every law is a point mass.
  bool degenerate() const noexcept { return degenerate_; }
  // Terms stopped decaying before the summation ended.
  bool divergence_suspected() const noexcept { return divergence_suspected_; }
  std::size_t truncation_index() const noexcept { return truncation_index_; }

  // sum_{k >= n} P_k^-1 (m_k(2) / m_k^2 - 1), obtained by continuing the
  // same summation from index n until the tail itself has converged.
  double tail_from(std::size_t n) const;

 private:
  friend VarianceSeries delta2_partial(const EnvironmentSequence&, std::size_t);
  EnvironmentSequence env_ = EnvironmentSequence::of_laws(
      {OffspringLaw::finite({{1, 1.0}})});
  std::size_t max_terms_ = 0;
  std::vector<double> partials_;
  bool converged_ = false;
  bool degenerate_ = false;
  bool divergence_suspected_ = false;
  std::size_t truncation_index_ = 0;
};

// Throws DivergenceError when the term ratio stays >= 1 for 50 consecutive
// terms.
VarianceSeries delta2_partial(const EnvironmentSequence& env,
                              std::size_t n_terms = kMaxSeriesTerms);

// Var_xi(W - W_n) = delta^2_inf(T^n xi) / P_n.
double delta2_tail(const EnvironmentSequence& env, std::size_t n);

// delta_inf(T^n xi), the standard deviation of W under the shifted law.
// Throws DegenerateError when it is zero and DivergenceError when the
// series does not converge.
double delta2_shifted(const EnvironmentSequence& env, std::size_t n);

// U_n = sqrt(P_n) (W_hat - W_n) / delta_inf(T^n xi).
double u_statistic(const EnvironmentSequence& env, std::size_t n, double w_n,
                   double w_hat);
// Same with log P_n and delta_inf(T^n xi) precomputed.
double u_statistic(double log_pn, double delta, double w_n, double w_hat);

enum class LimitKind { kDelta2, kPhi2Sample, kQuenchedMgf, kExtinctionProb };

// A computed limit object with its error metadata.
struct LimitEstimate {
  LimitKind kind = LimitKind::kDelta2;
  double value = 0.0;
  std::vector<double> sample;  // sorted, for kPhi2Sample
  std::optional<double> std_error;
  nlohmann::json meta = nlohmann::json::object();

  nlohmann::json to_json() const;
};

std::string to_string(LimitKind kind);

enum class SamplingMode { kQuenched, kAnnealed };

// Sorted draws of G sqrt(W_depth) under the quenched law P_xi of `env`,
// G standard normal independent of W.
LimitEstimate limit_law_sample(const EnvironmentSequence& env,
                               std::size_t reps, std::size_t depth,
                               std::uint64_t seed, unsigned workers = 0);

// Annealed version: replicate r draws its own environment with seed
// mix(env_seed, r).
LimitEstimate limit_law_sample(const EnvironmentModel& model,
                               std::size_t reps, std::size_t depth,
                               std::uint64_t env_seed, std::uint64_t seed,
                               unsigned workers = 0);

inline constexpr std::size_t kMaxMgfDepth = 1000;

// psi_n(t, xi) = E_xi exp(t W_n) via psi_{n+1}(t, xi) = phi_{xi_0}(psi_n(t /
// m_0, T xi)), psi_0(t) = e^t. Depths beyond 1000 evaluate psi_1000.
// Throws DivergenceError when a generating function is evaluated outside
// its radius of convergence or overflows.
double quenched_mgf(const EnvironmentSequence& env, double t, std::size_t n);

struct ExtinctionEstimate {
  double value = 0.0;
  // q_depth - q_{depth-1}.
  double last_increment = 0.0;
};

// q_depth = phi_0(phi_1(... phi_{depth-1}(0))), the probability that the
// line is extinct by generation `depth`.
ExtinctionEstimate extinction_prob(const EnvironmentSequence& env,
                                   std::size_t depth);

}  // namespace bpre
