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
#include <memory>
#include <span>
#include <vector>

#include "bpre/offspring.hpp"

namespace bpre {

class EnvironmentModel;
class EnvironmentSequence;
EnvironmentSequence realize(const EnvironmentModel& model, std::size_t horizon,
                            std::uint64_t env_seed);

enum class EnvironmentKind { kDeterministic, kIid, kMarkov };

// How a deterministic (varying) environment continues past its explicit list.
enum class Extension { kRepeatLast, kCyclic };

// Generator of the environment sequence xi = (xi_0, xi_1, ...).
//
// Every kind carries a catalogue of offspring laws ("states"); a realized
// sequence is a list of state indices into it. Deterministic models describe
// a varying environment, IID and Markov models are the stationary ergodic
// generators. Markov chains are assumed irreducible; ergodicity is not
// verified.
class EnvironmentModel {
 public:
  static EnvironmentModel deterministic(std::vector<OffspringLaw> laws,
                                        Extension extension = Extension::kRepeatLast);
  static EnvironmentModel iid(std::vector<OffspringLaw> laws,
                              std::vector<double> probs);
  static EnvironmentModel markov(std::vector<OffspringLaw> laws,
                                 std::vector<std::vector<double>> transition,
                                 std::vector<double> initial);
  // Markov chain started from its stationary distribution.
  static EnvironmentModel markov_stationary(
      std::vector<OffspringLaw> laws,
      std::vector<std::vector<double>> transition);
  // Single-law deterministic model.
  static EnvironmentModel constant(OffspringLaw law);

  EnvironmentKind kind() const noexcept;
  Extension extension() const noexcept;
  std::size_t num_states() const noexcept;
  const OffspringLaw& law(std::size_t state) const;
  const std::vector<OffspringLaw>& laws() const noexcept;
  // log m and m(2)/m^2 - 1 per state.
  double log_mean(std::size_t state) const;
  double variance_ratio(std::size_t state) const;

  std::span<const double> iid_probs() const noexcept;
  const std::vector<std::vector<double>>& transition() const noexcept;
  std::span<const double> initial() const noexcept;

  // States that can occur in a realization.
  const std::vector<std::size_t>& possible_states() const noexcept;
  // Every possible law has p_0 = 0.
  bool strongly_supercritical() const noexcept;
  // No possible law is a point mass.
  bool nondegenerate() const noexcept;
  // IID or Markov over a finite catalogue.
  bool finite_state() const noexcept;

  // Stationary distribution over states: the IID weights, the solution of
  // pi P = pi (power iteration on the lazy chain to 1e-12), or for a
  // deterministic model the limiting frequencies of the extension rule.
  std::vector<double> stationary() const;
  // Stationary mean of log m_0, the growth rate a of P_n.
  double log_growth_rate() const;
  // Essential infimum of m_0 over possible states.
  double min_mean() const;

  // Same Markov model with another initial distribution.
  EnvironmentModel with_initial(std::vector<double> initial) const;

  std::string describe() const;

 private:
  struct Impl;
  explicit EnvironmentModel(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;

  friend class EnvironmentSequence;
  friend EnvironmentSequence realize(const EnvironmentModel&, std::size_t,
                                     std::uint64_t);
};

// One realized environment (xi_0, ..., xi_{horizon-1}), possibly shifted.
// Cheap to copy: the state list is shared and shifting is O(1).
class EnvironmentSequence {
 public:
  // Deterministic sequence over an explicit list of laws, length laws.size().
  static EnvironmentSequence of_laws(std::vector<OffspringLaw> laws);

  std::size_t size() const noexcept { return length_; }
  const OffspringLaw& law(std::size_t k) const;
  std::size_t state(std::size_t k) const;
  double log_mean(std::size_t k) const;
  double variance_ratio(std::size_t k) const;

  std::uint64_t env_seed() const noexcept { return env_seed_; }
  std::size_t offset() const noexcept { return offset_; }
  const EnvironmentModel& origin_model() const noexcept { return model_; }

  // T^n xi; requires n < size().
  EnvironmentSequence shift(std::size_t n) const;

  // The same realization continued to `length` entries (from the current
  // offset) by re-realizing the origin model with the stored seed.
  EnvironmentSequence extended(std::size_t length) const;

 private:
  EnvironmentSequence(EnvironmentModel model,
                      std::shared_ptr<const std::vector<std::uint32_t>> states,
                      std::size_t begin, std::size_t length,
                      std::uint64_t env_seed, std::size_t offset);

  EnvironmentModel model_;
  std::shared_ptr<const std::vector<std::uint32_t>> states_;
  std::size_t begin_ = 0;
  std::size_t length_ = 0;
  std::uint64_t env_seed_ = 0;
  std::size_t offset_ = 0;

  friend EnvironmentSequence realize(const EnvironmentModel&, std::size_t,
                                     std::uint64_t);
};

// Draws one realization of length `horizon`. A pure function of its
// arguments; deterministic models ignore the seed, and a longer horizon with
// the same seed extends a shorter one.
EnvironmentSequence realize(const EnvironmentModel& model, std::size_t horizon,
                            std::uint64_t env_seed);

inline EnvironmentSequence shift(const EnvironmentSequence& seq,
                                 std::size_t n) {
  return seq.shift(n);
}

}  // namespace bpre
