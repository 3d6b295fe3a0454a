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

#include "bpre/limits.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bpre/compensated_sum.hpp"
#include "bpre/distributions.hpp"
#include "bpre/engine.hpp"
#include "bpre/error.hpp"
#include "bpre/parallel.hpp"

namespace bpre {
namespace {

constexpr double kRelIncrement = 1e-12;
constexpr int kConvergedStreak = 5;
constexpr int kDivergenceStreak = 50;

// Yields terms P_k^-1 (m_k(2)/m_k^2 - 1) for k = first, first + 1, ...,
// extending the environment geometrically as it is consumed.
class TermStream {
 public:
  TermStream(const EnvironmentSequence& env, std::size_t first, std::size_t limit)
      : env_(env), k_(first), limit_(limit) {
    ensure(first + 1);
    for (std::size_t i = 0; i < first; ++i) log_p_ += env_.log_mean(i);
  }

  bool done() const { return k_ >= limit_; }
  std::size_t index() const { return k_; }

  double next() {
    ensure(k_ + 1);
    const double term = std::exp(-log_p_.value()) * env_.variance_ratio(k_);
    log_p_ += env_.log_mean(k_);
    ++k_;
    return term;
  }

 private:
  void ensure(std::size_t length) {
    if (length <= env_.size()) return;
    env_ = env_.extended(std::max(length, 2 * env_.size() + 64));
  }

  EnvironmentSequence env_;
  std::size_t k_;
  std::size_t limit_;
  CompensatedSum log_p_;
};

// Sum of the terms from index `first` until five consecutive terms are each
// below 1e-12 of the running sum. A sum that stays exactly zero is scanned
// to the end of the budget.
struct TailResult {
  double sum = 0.0;
  bool converged = false;
};

TailResult tail_sum(const EnvironmentSequence& env, std::size_t first,
                    std::size_t max_terms) {
  TermStream terms(env, first, first + max_terms);
  CompensatedSum sum;
  int streak = 0;
  while (!terms.done()) {
    const double t = terms.next();
    sum += t;
    if (sum.value() > 0.0 && t <= kRelIncrement * sum.value()) {
      if (++streak >= kConvergedStreak) return {sum.value(), true};
    } else {
      streak = 0;
    }
  }
  return {sum.value(), sum.value() == 0.0};
}

}  // namespace

double log_Pn(const EnvironmentSequence& env, std::size_t n) {
  if (n > env.size()) {
    throw HorizonError("log_Pn: n = " + std::to_string(n) +
                       " exceeds the realized length " + std::to_string(env.size()));
  }
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) s += env.log_mean(i);
  return s.value();
}

double VarianceSeries::limit() const noexcept {
  return partials_.empty() ? 0.0 : partials_.back();
}

double VarianceSeries::tail_from(std::size_t n) const {
  return tail_sum(env_, n, max_terms_).sum;
}

VarianceSeries delta2_partial(const EnvironmentSequence& env,
                              std::size_t n_terms) {
  if (n_terms < 1) throw InvalidArgument("delta2_partial: n_terms must be >= 1");
  VarianceSeries s;
  s.env_ = env;
  s.max_terms_ = n_terms;
  TermStream terms(env, 0, n_terms);
  CompensatedSum sum;
  int small = 0;
  int rising = 0;
  double previous = 0.0;
  while (!terms.done()) {
    const double t = terms.next();
    sum += t;
    s.partials_.push_back(sum.value());
    if (sum.value() > 0.0 && t <= kRelIncrement * sum.value()) {
      if (++small >= kConvergedStreak) {
        s.converged_ = true;
        break;
      }
    } else {
      small = 0;
    }
    if (previous > 0.0 && t >= previous) {
      if (++rising >= kDivergenceStreak) {
        throw DivergenceError(
            "variance series: terms stopped decaying (non-increasing for 50 "
            "terms from index " +
            std::to_string(terms.index() - kDivergenceStreak) + ")");
      }
    } else {
      rising = 0;
    }
    previous = t;
  }
  s.truncation_index_ = s.partials_.size();
  if (sum.value() == 0.0) {
    s.converged_ = true;
    s.degenerate_ = true;
  }
  s.divergence_suspected_ = !s.converged_;
  return s;
}

double delta2_tail(const EnvironmentSequence& env, std::size_t n) {
  const TailResult r = tail_sum(env, n, kMaxSeriesTerms);
  if (!r.converged) {
    throw DivergenceError("variance series tail from " + std::to_string(n) +
                          " did not converge");
  }
  return r.sum;
}

double delta2_shifted(const EnvironmentSequence& env, std::size_t n) {
  const EnvironmentSequence shifted = env.extended(n + 1).shift(n);
  const VarianceSeries s = delta2_partial(shifted);
  if (!s.converged()) {
    throw DivergenceError("variance series of the shifted environment did not "
                          "converge within " +
                          std::to_string(kMaxSeriesTerms) + " terms");
  }
  if (s.degenerate()) {
    throw DegenerateError(
        "delta_inf(T^n xi) = 0: every law from generation " + std::to_string(n) +
        " on is a point mass (the limit law needs p_i(xi_0) < 1 for all i)");
  }
  return std::sqrt(s.limit());
}

double u_statistic(double log_pn, double delta, double w_n, double w_hat) {
  if (!(delta > 0.0)) throw DegenerateError("u_statistic: delta must be > 0");
  return std::exp(0.5 * log_pn) * (w_hat - w_n) / delta;
}

double u_statistic(const EnvironmentSequence& env, std::size_t n, double w_n,
                   double w_hat) {
  const double delta = delta2_shifted(env, n);
  return u_statistic(log_Pn(env.extended(n), n), delta, w_n, w_hat);
}

std::string to_string(LimitKind kind) {
  switch (kind) {
    case LimitKind::kDelta2:
      return "Delta2";
    case LimitKind::kPhi2Sample:
      return "Phi2Sample";
    case LimitKind::kQuenchedMgf:
      return "QuenchedMGF";
    case LimitKind::kExtinctionProb:
      return "ExtinctionProb";
  }
  return "unknown";
}

nlohmann::json LimitEstimate::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  if (kind == LimitKind::kPhi2Sample) {
    j["sample_size"] = sample.size();
    if (!sample.empty()) {
      auto q = [&](double p) {
        const auto i = static_cast<std::size_t>(p * static_cast<double>(sample.size() - 1));
        return sample[i];
      };
      j["quantiles"] = {{"0.01", q(0.01)}, {"0.25", q(0.25)}, {"0.5", q(0.5)},
                        {"0.75", q(0.75)}, {"0.99", q(0.99)}};
    }
  } else {
    j["value"] = value;
  }
  j["std_error"] = std_error ? nlohmann::json(*std_error) : nlohmann::json(nullptr);
  j["meta"] = meta;
  return j;
}

namespace {

double limit_draw(const EnvironmentSequence& env, std::size_t depth,
                  std::uint64_t traj_seed, std::uint64_t normal_seed) {
  const Trajectory t = simulate(env, depth, traj_seed);
  if (t.capped) {
    throw EstimatorInvalid("limit_law_sample: population cap reached before depth");
  }
  Rng g(normal_seed);
  return dist::normal(g) * std::sqrt(t.w.back());
}

}  // namespace

LimitEstimate limit_law_sample(const EnvironmentSequence& env,
                               std::size_t reps, std::size_t depth,
                               std::uint64_t seed, unsigned workers) {
  if (reps < 1 || depth < 1) {
    throw InvalidArgument("limit_law_sample: reps and depth must be >= 1");
  }
  const EnvironmentSequence e = env.extended(depth);
  const std::uint64_t normal_seed = substream(seed, Stream::kLimitLaw);
  LimitEstimate est;
  est.kind = LimitKind::kPhi2Sample;
  est.sample = parallel_map(reps, workers, [&](std::size_t r) {
    return limit_draw(e, depth, mix(seed, r), mix(normal_seed, r));
  });
  std::sort(est.sample.begin(), est.sample.end());
  est.meta = {{"mode", "quenched"}, {"reps", reps}, {"depth", depth},
              {"seed", seed}, {"env_seed", env.env_seed()}};
  return est;
}

LimitEstimate limit_law_sample(const EnvironmentModel& model,
                               std::size_t reps, std::size_t depth,
                               std::uint64_t env_seed, std::uint64_t seed,
                               unsigned workers) {
  if (reps < 1 || depth < 1) {
    throw InvalidArgument("limit_law_sample: reps and depth must be >= 1");
  }
  const std::uint64_t normal_seed = substream(seed, Stream::kLimitLaw);
  LimitEstimate est;
  est.kind = LimitKind::kPhi2Sample;
  est.sample = parallel_map(reps, workers, [&](std::size_t r) {
    const EnvironmentSequence e = realize(model, depth, mix(env_seed, r));
    return limit_draw(e, depth, mix(seed, r), mix(normal_seed, r));
  });
  std::sort(est.sample.begin(), est.sample.end());
  est.meta = {{"mode", "annealed"}, {"reps", reps}, {"depth", depth},
              {"seed", seed}, {"env_seed", env_seed}};
  return est;
}

double quenched_mgf(const EnvironmentSequence& env, double t, std::size_t n) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidArgument("quenched_mgf: t must be finite and >= 0");
  }
  const std::size_t depth = std::min(n, kMaxMgfDepth);
  const EnvironmentSequence e = env.extended(depth);
  const double log_pn = log_Pn(e, depth);
  // Carries u = psi - 1; exp(t / P_n) itself rounds to 1 at depth.
  double u = std::expm1(t * std::exp(-log_pn));
  for (std::size_t k = depth; k-- > 0;) {
    u = e.law(k).pgf_minus_one(u);
    if (!std::isfinite(u)) {
      throw DivergenceError("quenched_mgf: generating function overflow at t = " +
                            std::to_string(t));
    }
  }
  return 1.0 + u;
}

ExtinctionEstimate extinction_prob(const EnvironmentSequence& env,
                                   std::size_t depth) {
  if (depth < 1) throw InvalidArgument("extinction_prob: depth must be >= 1");
  const EnvironmentSequence e = env.extended(depth);
  auto compose = [&](std::size_t d) {
    double s = 0.0;
    for (std::size_t k = d; k-- > 0;) s = e.law(k).pgf(s);
    return s;
  };
  const double q = compose(depth);
  const double previous = compose(depth - 1);
  return {q, q - previous};
}

}  // namespace bpre
