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

#include "bpre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "bpre/compensated_sum.hpp"
#include "bpre/error.hpp"

namespace bpre {
namespace {

constexpr double kSumTolerance = 1e-12;

void check_distribution(std::span<const double> probs, const std::string& what,
                        std::size_t expected_size) {
  if (probs.size() != expected_size) {
    throw InvalidArgument(what + ": expected " + std::to_string(expected_size) +
                          " entries, got " + std::to_string(probs.size()));
  }
  CompensatedSum sum;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InvalidArgument(what + ": entries must be finite and >= 0");
    }
    sum += p;
  }
  if (std::fabs(sum.value() - 1.0) > kSumTolerance) {
    throw InvalidArgument(what + ": entries must sum to 1 within 1e-12");
  }
}

std::vector<double> cumulative(std::span<const double> probs) {
  std::vector<double> out(probs.size());
  CompensatedSum sum;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    sum += probs[i];
    out[i] = sum.value();
  }
  return out;
}

std::size_t categorical(std::span<const double> cdf,
                        std::span<const double> probs, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it != cdf.end()) {
    const auto i = static_cast<std::size_t>(it - cdf.begin());
    if (probs[i] > 0.0) return i;
  }
  // Rounding pushed u past the last partial sum: last state with mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return 0;
}

}  // namespace

struct EnvironmentModel::Impl {
  EnvironmentKind kind = EnvironmentKind::kDeterministic;
  Extension extension = Extension::kRepeatLast;
  std::vector<OffspringLaw> laws;
  std::vector<double> log_means;
  std::vector<double> variance_ratios;
  std::vector<double> iid_probs;
  std::vector<double> iid_cdf;
  std::vector<std::vector<double>> transition;
  std::vector<std::vector<double>> transition_cdf;
  std::vector<double> initial;
  std::vector<double> initial_cdf;
  std::vector<std::size_t> possible;

  void finish() {
    if (laws.empty()) throw InvalidArgument("environment: no laws given");
    if (laws.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw InvalidArgument("environment: too many states");
    }
    for (const auto& law : laws) {
      log_means.push_back(std::log(law.mean()));
      variance_ratios.push_back(
          std::max(0.0, law.second_moment() / (law.mean() * law.mean()) - 1.0));
    }
    switch (kind) {
      case EnvironmentKind::kDeterministic:
        possible.resize(laws.size());
        std::iota(possible.begin(), possible.end(), std::size_t{0});
        break;
      case EnvironmentKind::kIid:
        for (std::size_t i = 0; i < laws.size(); ++i) {
          if (iid_probs[i] > 0.0) possible.push_back(i);
        }
        break;
      case EnvironmentKind::kMarkov: {
        std::vector<bool> seen(laws.size(), false);
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < laws.size(); ++i) {
          if (initial[i] > 0.0) {
            seen[i] = true;
            stack.push_back(i);
          }
        }
        while (!stack.empty()) {
          const std::size_t i = stack.back();
          stack.pop_back();
          for (std::size_t j = 0; j < laws.size(); ++j) {
            if (transition[i][j] > 0.0 && !seen[j]) {
              seen[j] = true;
              stack.push_back(j);
            }
          }
        }
        for (std::size_t i = 0; i < laws.size(); ++i) {
          if (seen[i]) possible.push_back(i);
        }
        break;
      }
    }
  }
};

EnvironmentModel::EnvironmentModel(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

EnvironmentModel EnvironmentModel::deterministic(std::vector<OffspringLaw> laws,
                                                 Extension extension) {
  auto impl = std::make_shared<Impl>();
  impl->kind = EnvironmentKind::kDeterministic;
  impl->extension = extension;
  impl->laws = std::move(laws);
  impl->finish();
  return EnvironmentModel(std::move(impl));
}

EnvironmentModel EnvironmentModel::constant(OffspringLaw law) {
  return deterministic({std::move(law)});
}

EnvironmentModel EnvironmentModel::iid(std::vector<OffspringLaw> laws,
                                       std::vector<double> probs) {
  check_distribution(probs, "iid probabilities", laws.size());
  auto impl = std::make_shared<Impl>();
  impl->kind = EnvironmentKind::kIid;
  impl->laws = std::move(laws);
  impl->iid_cdf = cumulative(probs);
  impl->iid_probs = std::move(probs);
  impl->finish();
  return EnvironmentModel(std::move(impl));
}

EnvironmentModel EnvironmentModel::markov(
    std::vector<OffspringLaw> laws, std::vector<std::vector<double>> transition,
    std::vector<double> initial) {
  const std::size_t n = laws.size();
  if (transition.size() != n) {
    throw InvalidArgument("markov transition: expected " + std::to_string(n) +
                          " rows");
  }
  for (std::size_t i = 0; i < n; ++i) {
    check_distribution(transition[i],
                       "markov transition row " + std::to_string(i), n);
  }
  check_distribution(initial, "markov initial distribution", n);
  auto impl = std::make_shared<Impl>();
  impl->kind = EnvironmentKind::kMarkov;
  impl->laws = std::move(laws);
  for (const auto& row : transition) {
    impl->transition_cdf.push_back(cumulative(row));
  }
  impl->transition = std::move(transition);
  impl->initial_cdf = cumulative(initial);
  impl->initial = std::move(initial);
  impl->finish();
  return EnvironmentModel(std::move(impl));
}

EnvironmentModel EnvironmentModel::markov_stationary(
    std::vector<OffspringLaw> laws,
    std::vector<std::vector<double>> transition) {
  const std::size_t n = laws.size();
  // Validate first with a uniform start, then restart from pi.
  auto probe = markov(laws, transition, std::vector<double>(n, 1.0 / n));
  return probe.with_initial(probe.stationary());
}

EnvironmentModel EnvironmentModel::with_initial(
    std::vector<double> initial) const {
  if (impl_->kind != EnvironmentKind::kMarkov) {
    throw InvalidArgument("with_initial: model is not a Markov chain");
  }
  return markov(impl_->laws, impl_->transition, std::move(initial));
}

EnvironmentKind EnvironmentModel::kind() const noexcept { return impl_->kind; }
Extension EnvironmentModel::extension() const noexcept {
  return impl_->extension;
}
std::size_t EnvironmentModel::num_states() const noexcept {
  return impl_->laws.size();
}
const OffspringLaw& EnvironmentModel::law(std::size_t state) const {
  return impl_->laws.at(state);
}
const std::vector<OffspringLaw>& EnvironmentModel::laws() const noexcept {
  return impl_->laws;
}
double EnvironmentModel::log_mean(std::size_t state) const {
  return impl_->log_means.at(state);
}
double EnvironmentModel::variance_ratio(std::size_t state) const {
  return impl_->variance_ratios.at(state);
}
std::span<const double> EnvironmentModel::iid_probs() const noexcept {
  return impl_->iid_probs;
}
const std::vector<std::vector<double>>& EnvironmentModel::transition()
    const noexcept {
  return impl_->transition;
}
std::span<const double> EnvironmentModel::initial() const noexcept {
  return impl_->initial;
}
const std::vector<std::size_t>& EnvironmentModel::possible_states()
    const noexcept {
  return impl_->possible;
}

bool EnvironmentModel::strongly_supercritical() const noexcept {
  return std::all_of(impl_->possible.begin(), impl_->possible.end(),
                     [&](std::size_t i) { return impl_->laws[i].p0_zero(); });
}

bool EnvironmentModel::nondegenerate() const noexcept {
  return std::none_of(impl_->possible.begin(), impl_->possible.end(),
                      [&](std::size_t i) { return impl_->laws[i].degenerate(); });
}

bool EnvironmentModel::finite_state() const noexcept {
  return impl_->kind != EnvironmentKind::kDeterministic;
}

std::vector<double> EnvironmentModel::stationary() const {
  const std::size_t n = impl_->laws.size();
  switch (impl_->kind) {
    case EnvironmentKind::kIid:
      return impl_->iid_probs;
    case EnvironmentKind::kDeterministic: {
      std::vector<double> pi(n, 0.0);
      if (impl_->extension == Extension::kCyclic) {
        std::fill(pi.begin(), pi.end(), 1.0 / static_cast<double>(n));
      } else {
        pi.back() = 1.0;
      }
      return pi;
    }
    case EnvironmentKind::kMarkov:
      break;
  }
  // Lazy chain (P + I) / 2 has the same stationary law and is aperiodic.
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int iter = 0; iter < 10'000'000; ++iter) {
    for (std::size_t j = 0; j < n; ++j) {
      CompensatedSum s;
      for (std::size_t i = 0; i < n; ++i) s += pi[i] * impl_->transition[i][j];
      next[j] = 0.5 * (s.value() + pi[j]);
    }
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) change += std::fabs(next[j] - pi[j]);
    pi.swap(next);
    if (change < 1e-14) break;
  }
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (auto& p : pi) p /= total;
  return pi;
}

double EnvironmentModel::log_growth_rate() const {
  const auto pi = stationary();
  CompensatedSum a;
  for (std::size_t i = 0; i < pi.size(); ++i) a += pi[i] * impl_->log_means[i];
  return a.value();
}

double EnvironmentModel::min_mean() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i : impl_->possible) m = std::min(m, impl_->laws[i].mean());
  return m;
}

std::string EnvironmentModel::describe() const {
  std::ostringstream os;
  switch (impl_->kind) {
    case EnvironmentKind::kDeterministic:
      os << "deterministic[";
      break;
    case EnvironmentKind::kIid:
      os << "iid[";
      break;
    case EnvironmentKind::kMarkov:
      os << "markov[";
      break;
  }
  for (std::size_t i = 0; i < impl_->laws.size(); ++i) {
    if (i) os << ", ";
    os << impl_->laws[i].describe();
  }
  os << "]";
  return os.str();
}

EnvironmentSequence::EnvironmentSequence(
    EnvironmentModel model,
    std::shared_ptr<const std::vector<std::uint32_t>> states, std::size_t begin,
    std::size_t length, std::uint64_t env_seed, std::size_t offset)
    : model_(std::move(model)),
      states_(std::move(states)),
      begin_(begin),
      length_(length),
      env_seed_(env_seed),
      offset_(offset) {}

EnvironmentSequence EnvironmentSequence::of_laws(std::vector<OffspringLaw> laws) {
  const std::size_t n = laws.size();
  if (n == 0) throw InvalidArgument("of_laws: empty list");
  return realize(EnvironmentModel::deterministic(std::move(laws)), n, 0);
}

const OffspringLaw& EnvironmentSequence::law(std::size_t k) const {
  return model_.impl_->laws[state(k)];
}

std::size_t EnvironmentSequence::state(std::size_t k) const {
  if (k >= length_) {
    throw HorizonError("environment index " + std::to_string(k) +
                       " beyond realized length " + std::to_string(length_));
  }
  return (*states_)[begin_ + k];
}

double EnvironmentSequence::log_mean(std::size_t k) const {
  return model_.impl_->log_means[state(k)];
}

double EnvironmentSequence::variance_ratio(std::size_t k) const {
  return model_.impl_->variance_ratios[state(k)];
}

EnvironmentSequence EnvironmentSequence::shift(std::size_t n) const {
  if (n >= length_) {
    throw HorizonError("shift by " + std::to_string(n) +
                       " leaves nothing of a sequence of length " +
                       std::to_string(length_));
  }
  return EnvironmentSequence(model_, states_, begin_ + n, length_ - n,
                             env_seed_, offset_ + n);
}

EnvironmentSequence EnvironmentSequence::extended(std::size_t length) const {
  if (length <= length_) return *this;
  auto longer = realize(model_, offset_ + length, env_seed_);
  return offset_ == 0 ? longer : longer.shift(offset_);
}

EnvironmentSequence realize(const EnvironmentModel& model, std::size_t horizon,
                            std::uint64_t env_seed) {
  if (horizon == 0) throw InvalidArgument("realize: horizon must be >= 1");
  const auto& impl = *model.impl_;
  auto states = std::make_shared<std::vector<std::uint32_t>>(horizon);
  auto& out = *states;
  switch (impl.kind) {
    case EnvironmentKind::kDeterministic: {
      const std::size_t n = impl.laws.size();
      for (std::size_t k = 0; k < horizon; ++k) {
        const std::size_t i =
            k < n ? k : (impl.extension == Extension::kCyclic ? k % n : n - 1);
        out[k] = static_cast<std::uint32_t>(i);
      }
      break;
    }
    case EnvironmentKind::kIid: {
      Rng rng(env_seed);
      for (std::size_t k = 0; k < horizon; ++k) {
        out[k] = static_cast<std::uint32_t>(
            categorical(impl.iid_cdf, impl.iid_probs, rng.uniform()));
      }
      break;
    }
    case EnvironmentKind::kMarkov: {
      Rng rng(env_seed);
      std::size_t s = categorical(impl.initial_cdf, impl.initial, rng.uniform());
      out[0] = static_cast<std::uint32_t>(s);
      for (std::size_t k = 1; k < horizon; ++k) {
        s = categorical(impl.transition_cdf[s], impl.transition[s],
                        rng.uniform());
        out[k] = static_cast<std::uint32_t>(s);
      }
      break;
    }
  }
  return EnvironmentSequence(model, std::move(states), 0, horizon, env_seed, 0);
}

}  // namespace bpre
