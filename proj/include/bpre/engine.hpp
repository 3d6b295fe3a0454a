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

#include "bpre/compensated_sum.hpp"
#include "bpre/environment.hpp"
#include "bpre/rng.hpp"

namespace bpre {

// One simulated path Z_0..Z_n under a fixed environment, with log P_k and
// W_k = Z_k / P_k. Z_0 = 1 and log P_0 = 0.
struct Trajectory {
  EnvironmentSequence env;
  std::vector<std::uint64_t> z;
  std::vector<double> log_p;
  std::vector<double> w;
  std::uint64_t traj_seed = 0;
  std::uint64_t cap = kDefaultPopulationCap;
  // Set when some generation would exceed `cap`; the path then stops at the
  // last complete generation.
  bool capped = false;

  std::size_t generations() const noexcept { return z.size() - 1; }

  // Continuation state: the stream position after the last generation and
  // the accumulators behind log_p and w.
  Rng rng{0};
  CompensatedSum log_p_sum;
  double p_product = 1.0;
};

// Simulates n_max generations: Z_{k+1} is one draw of the Z_k-fold
// convolution of law k. Deterministic given (env, traj_seed).
Trajectory simulate(const EnvironmentSequence& env, std::size_t n_max,
                    std::uint64_t traj_seed,
                    std::uint64_t cap = kDefaultPopulationCap);

// Adds `generations` more generations to an uncapped trajectory, reading the
// laws from `env` (which must agree with traj.env on the simulated prefix).
// extend(simulate(env, n, s), env, k) equals simulate(env, n + k, s).
void extend(Trajectory& traj, const EnvironmentSequence& env,
            std::size_t generations);

// Estimate of the martingale limit W by deep continuation: value = W_{n+K}.
struct WEstimate {
  double value = 0.0;
  std::size_t base_generation = 0;
  std::size_t extra_depth = 0;
  // Var_xi(W - W_{n+K}) = sum_{k >= n+K} P_k^-1 (m_k(2) / m_k^2 - 1).
  double residual_variance_bound = 0.0;
};

WEstimate estimate_W(const EnvironmentSequence& env, const Trajectory& traj,
                     std::size_t extra_depth);

// One replicate of the raw material for every check: W_n and W_hat - W_n.
struct FluctuationPair {
  double w_n = 0.0;
  double dw = 0.0;
};

// Quenched sample: `reps` independent trajectories under the same
// environment, replicate r using stream mix(seed, r). Results are in
// replicate order whatever the worker count.
std::vector<FluctuationPair> sample_fluctuation(const EnvironmentSequence& env,
                                                std::size_t n,
                                                std::size_t extra_depth,
                                                std::size_t reps,
                                                std::uint64_t seed,
                                                unsigned workers = 0);

// W at several generations of one path simulated to `depth`, plus
// W_hat = W_depth.
struct PathSummary {
  std::vector<double> w_at;
  double w_hat = 0.0;
};

// Simulates to `depth` and records W at each generation in `gens`.
// Throws EstimatorInvalid if the path is capped before `depth`.
PathSummary summarize_path(const EnvironmentSequence& env,
                           std::span<const std::size_t> gens,
                           std::size_t depth, std::uint64_t traj_seed,
                           std::uint64_t cap = kDefaultPopulationCap);

}  // namespace bpre
