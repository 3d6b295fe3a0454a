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

#include "bpre/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bpre/error.hpp"
#include "bpre/limits.hpp"
#include "bpre/parallel.hpp"

namespace bpre {
namespace {

double normalized(std::uint64_t z, double log_p, double p_product) {
  if (z == 0) return 0.0;
  const double zd = static_cast<double>(z);
  if (std::isnormal(p_product)) return zd / p_product;
  return std::exp(std::log(zd) - log_p);
}

}  // namespace

Trajectory simulate(const EnvironmentSequence& env, std::size_t n_max,
                    std::uint64_t traj_seed, std::uint64_t cap) {
  if (n_max > env.size()) {
    throw HorizonError("simulate: " + std::to_string(n_max) +
                       " generations requested but the environment has " +
                       std::to_string(env.size()));
  }
  if (cap < 1) throw InvalidArgument("simulate: cap must be >= 1");
  Trajectory t{.env = env,
               .z = {},
               .log_p = {},
               .w = {},
               .traj_seed = traj_seed,
               .cap = cap,
               .capped = false,
               .rng = Rng(traj_seed),
               .log_p_sum = {},
               .p_product = 1.0};
  t.z.reserve(n_max + 1);
  t.log_p.reserve(n_max + 1);
  t.w.reserve(n_max + 1);
  t.z.push_back(1);
  t.log_p.push_back(0.0);
  t.w.push_back(1.0);
  extend(t, env, n_max);
  return t;
}

void extend(Trajectory& t, const EnvironmentSequence& env,
            std::size_t generations) {
  if (t.capped) throw EstimatorInvalid("extend: trajectory is capped");
  const std::size_t start = t.generations();
  if (start + generations > env.size()) {
    throw HorizonError("extend: environment too short for " +
                       std::to_string(start + generations) + " generations");
  }
  for (std::size_t k = start; k < start + generations; ++k) {
    const OffspringLaw& law = env.law(k);
    std::uint64_t next = 0;
    try {
      next = law.sample_total(t.z.back(), t.rng, t.cap);
    } catch (const PopulationOverflow&) {
      t.capped = true;
      return;
    }
    t.log_p_sum += env.log_mean(k);
    t.p_product *= law.mean();
    t.z.push_back(next);
    t.log_p.push_back(t.log_p_sum.value());
    t.w.push_back(normalized(next, t.log_p.back(), t.p_product));
  }
}

WEstimate estimate_W(const EnvironmentSequence& env, const Trajectory& traj,
                     std::size_t extra_depth) {
  if (extra_depth < 1) throw InvalidArgument("estimate_W: extra_depth must be >= 1");
  if (traj.capped) throw EstimatorInvalid("estimate_W: trajectory is capped");
  const std::size_t n = traj.generations();
  if (n + extra_depth > env.size()) {
    throw HorizonError("estimate_W: environment too short for depth " +
                       std::to_string(n + extra_depth));
  }
  Trajectory deeper = traj;
  extend(deeper, env, extra_depth);
  if (deeper.capped) {
    throw EstimatorInvalid("estimate_W: continuation exceeded the population cap");
  }
  WEstimate est;
  est.value = deeper.w.back();
  est.base_generation = n;
  est.extra_depth = extra_depth;
  est.residual_variance_bound = delta2_tail(env, n + extra_depth);
  return est;
}

PathSummary summarize_path(const EnvironmentSequence& env,
                           std::span<const std::size_t> gens,
                           std::size_t depth, std::uint64_t traj_seed,
                           std::uint64_t cap) {
  const Trajectory t = simulate(env, depth, traj_seed, cap);
  if (t.capped) {
    throw EstimatorInvalid(
        "population cap reached before the estimator depth; reduce depth");
  }
  PathSummary s;
  s.w_at.reserve(gens.size());
  for (std::size_t g : gens) {
    if (g > depth) throw InvalidArgument("summarize_path: generation beyond depth");
    s.w_at.push_back(t.w[g]);
  }
  s.w_hat = t.w.back();
  return s;
}

std::vector<FluctuationPair> sample_fluctuation(const EnvironmentSequence& env,
                                                std::size_t n,
                                                std::size_t extra_depth,
                                                std::size_t reps,
                                                std::uint64_t seed,
                                                unsigned workers) {
  if (reps < 1) throw InvalidArgument("sample_fluctuation: reps must be >= 1");
  if (extra_depth < 1) {
    throw InvalidArgument("sample_fluctuation: extra_depth must be >= 1");
  }
  const std::size_t gens[] = {n};
  return parallel_map(reps, workers, [&](std::size_t r) {
    const PathSummary s = summarize_path(env, gens, n + extra_depth, mix(seed, r));
    return FluctuationPair{s.w_at[0], s.w_hat - s.w_at[0]};
  });
}

}  // namespace bpre
