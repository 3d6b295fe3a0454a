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
#include <span>
#include <string>
#include <vector>

#include "bpre/environment.hpp"
#include "bpre/limits.hpp"
#include "bpre/offspring.hpp"
#include "json.hpp"

namespace bpre {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::size_t kDefaultExtraDepth = 25;

// Statistic of |W_hat - W_n| whose decay in n is regressed.
enum class RateStatistic { kMeanAbs, kMeanSquare, kMedianAbs };

std::string to_string(RateStatistic s);
RateStatistic rate_statistic_from_string(const std::string& s);

// Expected almost-sure decay of W - W_n. For the exponential kind the
// principal rate is exp(-a n / q) with a = E log m_0 and 1/p + 1/q = 1.
struct RateTarget {
  enum class Kind { kExponential, kPolynomial };
  Kind kind = Kind::kExponential;
  double a = 0.0;
  double p = 2.0;
  double q = 2.0;
  double alpha = 1.0;

  // p in (1, 2]; a > 0.
  static RateTarget exponential(double a, double p);
  static RateTarget polynomial(double alpha);

  // Slope of log(statistic) against n. Squared deviations decay at twice
  // the rate of absolute ones.
  double expected_slope(RateStatistic s) const;
  nlohmann::json to_json() const;
};

struct Criterion {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparator;  // "<=", ">=", "<", ">", "==" or "monotone"
  bool pass = false;
  std::string note;
};

// Outcome of one campaign. Every criterion's threshold also appears in
// `config`.
struct VerificationReport {
  std::string campaign;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json fits = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();
  std::vector<Criterion> criteria;
  std::vector<std::string> notes;
  bool degenerate = false;
  nlohmann::json provenance = nlohmann::json::object();
  double wall_seconds = 0.0;

  bool passed() const;
  Criterion& add(Criterion c);
  nlohmann::json to_json() const;
  // Header row plus one line per row, floats at 17 significant digits.
  std::string stats_csv() const;
};

// Seeds and resources shared by every campaign.
struct CampaignOptions {
  std::uint64_t env_seed = 0;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::uint64_t cap = kDefaultPopulationCap;
  std::size_t extra_depth = kDefaultExtraDepth;
};

// Fraction of the smallest fluctuation scale the estimator's residual sd
// may reach before a campaign is declared invalid.
inline constexpr double kMaxResidualFraction = 0.01;

struct RateConfig {
  RateTarget target;
  RateStatistic statistic = RateStatistic::kMeanAbs;
  std::vector<std::size_t> n_list;
  std::size_t reps = 1000;
  // Relative tolerance on the slope.
  double tolerance = 0.1;
  // Also require slope >= target - tolerance (acceptance band).
  bool two_sided = false;
  // Partial-sum heuristic for the polynomial kind.
  std::size_t series_paths = 100;
  std::size_t series_horizon = 30;
};

// Rate regression on precomputed statistics (one value per n). Pure; used
// by check_rate and by the synthetic calibration.
VerificationReport assess_rate(std::span<const std::size_t> n_list,
                               std::span<const double> values,
                               const RateConfig& cfg);

// Quenched rate campaign on one environment realized with opts.env_seed.
VerificationReport check_rate(const EnvironmentModel& model, const RateConfig& cfg,
                              const CampaignOptions& opts);

struct CltConfig {
  std::vector<std::size_t> n_list;
  std::size_t reps = 20000;
  SamplingMode mode = SamplingMode::kAnnealed;
  // Quenched mode: independent environments whose KS distances are averaged.
  std::size_t env_reps = 1;
  // Independent seeded campaigns; the pass fraction is checked.
  std::size_t repeats = 1;
  double min_pass_fraction = 0.95;
  double alpha = 0.01;
  // Bound on the final KS distance; defaults to the rejection threshold.
  std::optional<double> final_ks_max;
  // Depth of the limit sample; 0 uses max(n_list) + extra_depth.
  std::size_t limit_depth = 0;
};

VerificationReport check_clt(const EnvironmentModel& model, const CltConfig& cfg,
                             const CampaignOptions& opts);

struct TailCounts {
  std::size_t n = 0;
  double eps = 0.0;
  std::uint64_t exceed = 0;
  std::uint64_t reps = 0;
};

struct TailConfig {
  std::vector<std::size_t> n_list;
  std::vector<double> eps_list;
  std::size_t reps = 1'000'000;
  // Relative tolerance on the mean increment of log(-log p).
  double tolerance = 0.25;
  double lack_of_fit_alpha = 1e-6;
  // Cells with fewer exceedances are excluded from the fits.
  std::uint64_t min_count = 20;
};

// Tail-shape analysis of exceedance counts at one eps, n ascending.
struct TailAnalysis {
  std::vector<double> y;            // log(-log p_hat), NaN when censored
  std::vector<bool> censored;
  bool increasing = false;
  double mean_increment = 0.0;
  double lack_of_fit_chi2 = 0.0;
  double lack_of_fit_critical = 0.0;
  bool geometric_rejected = false;
  bool supergeometric = false;
};

// `log_m_min` is log of the essential infimum of m_0.
TailAnalysis analyze_tail(std::span<const TailCounts> cells, double log_m_min,
                          const TailConfig& cfg);

// Annealed tail campaign: replicate r draws its environment with
// mix(opts.env_seed, r).
VerificationReport check_tail(const EnvironmentModel& model, const TailConfig& cfg,
                              const CampaignOptions& opts);

struct MgfConfig {
  std::vector<double> t_grid;
  std::size_t n_cap = kMaxMgfDepth;
  // Expected values at given t (t, value, absolute tolerance).
  struct Expectation {
    double t = 0.0;
    std::optional<double> value;
    double tolerance = 1e-6;
    std::optional<bool> divergent;
  };
  std::vector<Expectation> expect;
  // Monte Carlo cross-check of E exp(t W_depth) = psi_depth(t).
  std::optional<double> mc_t;
  std::size_t mc_reps = 100000;
  std::size_t mc_depth = kDefaultExtraDepth;
};

enum class MgfVerdict { kStable, kDivergent, kUnresolved };
std::string to_string(MgfVerdict v);

struct MgfProbe {
  MgfVerdict verdict = MgfVerdict::kStable;
  double value = 0.0;  // psi at the deepest finite evaluation
  std::size_t depth = 0;
  std::string message;
};

// Evaluates psi_n(t) on the depth ladder 10, 20, 40, ..., n_cap.
MgfProbe probe_mgf(const EnvironmentSequence& env, double t, std::size_t n_cap);

VerificationReport check_exp_moment(const EnvironmentModel& model,
                                    const MgfConfig& cfg,
                                    const CampaignOptions& opts);

// Mechanism self-tests on synthetic input.
struct CalibrationConfig {
  std::size_t tail_instances = 100;
  std::size_t tail_reps = 1'000'000;
  std::size_t sampler_draws = 10000;
  std::size_t sampler_max_z = 50;
  std::size_t ks_campaigns = 100;
  std::size_t ks_reps = 10000;
  double ks_min_pass_fraction = 0.95;
};

VerificationReport run_calibration(const CalibrationConfig& cfg,
                                   const CampaignOptions& opts);

// Fraction of sampler-equivalence trials (families x z) whose fast and naive
// totals are rejected by the 1% two-sample KS test.
struct SamplerEquivalence {
  std::size_t trials = 0;
  std::size_t rejections = 0;
  double allowed_fraction = 0.0;
  bool pass = false;
};

SamplerEquivalence sampler_equivalence(std::span<const OffspringLaw> laws,
                                       std::size_t max_z, std::size_t draws,
                                       std::uint64_t seed, unsigned workers);

}  // namespace bpre
