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

#include "bpre/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "bpre/distributions.hpp"
#include "bpre/engine.hpp"
#include "bpre/error.hpp"
#include "bpre/parallel.hpp"
#include "bpre/rng.hpp"
#include "bpre/stats.hpp"

namespace bpre {
namespace {

constexpr std::size_t kBlock = std::size_t{1} << 16;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Runs fn(r) for r in [0, count) in blocks, handing each block's results to
// consume(first_index, results) in index order.
template <typename Fn, typename Consume>
void for_each_block(std::size_t count, unsigned workers, Fn fn, Consume consume) {
  for (std::size_t first = 0; first < count; first += kBlock) {
    const std::size_t len = std::min(kBlock, count - first);
    auto part = parallel_map(len, workers, [&](std::size_t i) { return fn(first + i); });
    consume(first, part);
  }
}

void require_ascending(const std::vector<std::size_t>& n_list, const char* who) {
  if (n_list.empty()) throw InvalidArgument(std::string(who) + ": n_list is empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) {
      throw InvalidArgument(std::string(who) + ": n_list must be strictly increasing");
    }
  }
}

// Number of i with v[i + 1] >= v[i].
std::size_t non_decreases(std::span<const double> v) {
  std::size_t bad = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) ++bad;
  }
  return bad;
}

Criterion make(std::string name, double value, double threshold,
               std::string comparator, std::string note = {}) {
  bool pass = false;
  if (comparator == "<=") pass = value <= threshold;
  else if (comparator == ">=") pass = value >= threshold;
  else if (comparator == "<") pass = value < threshold;
  else if (comparator == ">") pass = value > threshold;
  else if (comparator == "==") pass = value == threshold;
  return {std::move(name), value, threshold, std::move(comparator), pass, std::move(note)};
}

nlohmann::json options_json(const CampaignOptions& o) {
  return {{"env_seed", o.env_seed},
          {"seed", o.seed},
          {"workers", resolve_workers(o.workers)},
          {"cap", o.cap},
          {"extra_depth", o.extra_depth}};
}

bool finitely_many_states(const EnvironmentModel& m) {
  return m.finite_state() || m.kind() == EnvironmentKind::kDeterministic;
}

// Largest m(2)/m^2 - 1 over the states a realization can visit.
double max_variance_ratio(const EnvironmentModel& m) {
  double c = 0.0;
  for (std::size_t s : m.possible_states()) c = std::max(c, m.variance_ratio(s));
  return c;
}

std::string format17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest round-tripping form, for labels.
std::string short_label(double v) {
  char buf[40];
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

std::string to_string(RateStatistic s) {
  switch (s) {
    case RateStatistic::kMeanAbs:
      return "mean_abs";
    case RateStatistic::kMeanSquare:
      return "mean_square";
    case RateStatistic::kMedianAbs:
      return "median_abs";
  }
  return "unknown";
}

RateStatistic rate_statistic_from_string(const std::string& s) {
  if (s == "mean_abs") return RateStatistic::kMeanAbs;
  if (s == "mean_square") return RateStatistic::kMeanSquare;
  if (s == "median_abs") return RateStatistic::kMedianAbs;
  throw InvalidArgument("unknown rate statistic \"" + s +
                        "\" (expected mean_abs, mean_square or median_abs)");
}

RateTarget RateTarget::exponential(double a, double p) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw InvalidArgument("RateTarget: a = E log m_0 must be finite and > 0");
  }
  if (!(p > 1.0 && p <= 2.0)) throw InvalidArgument("RateTarget: p must be in (1, 2]");
  RateTarget t;
  t.kind = Kind::kExponential;
  t.a = a;
  t.p = p;
  t.q = p / (p - 1.0);
  return t;
}

RateTarget RateTarget::polynomial(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("RateTarget: alpha must be finite and > 0");
  }
  RateTarget t;
  t.kind = Kind::kPolynomial;
  t.alpha = alpha;
  return t;
}

double RateTarget::expected_slope(RateStatistic s) const {
  if (kind != Kind::kExponential) return kNaN;
  const double slope = -a / q;
  return s == RateStatistic::kMeanSquare ? 2.0 * slope : slope;
}

nlohmann::json RateTarget::to_json() const {
  if (kind == Kind::kPolynomial) return {{"kind", "polynomial"}, {"alpha", alpha}};
  return {{"kind", "exponential"}, {"a", a}, {"p", p}, {"q", q}};
}

bool VerificationReport::passed() const {
  if (degenerate) return false;
  return std::all_of(criteria.begin(), criteria.end(),
                     [](const Criterion& c) { return c.pass; });
}

Criterion& VerificationReport::add(Criterion c) {
  criteria.push_back(std::move(c));
  return criteria.back();
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json crit = nlohmann::json::array();
  for (const auto& c : criteria) {
    crit.push_back({{"name", c.name},
                    {"value", c.value},
                    {"threshold", c.threshold},
                    {"comparator", c.comparator},
                    {"pass", c.pass},
                    {"note", c.note}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"campaign", campaign},
          {"config", config},
          {"statistics", {{"columns", columns}, {"rows", rows}}},
          {"fits", fits},
          {"details", details},
          {"criteria", crit},
          {"passed", passed()},
          {"degenerate", degenerate},
          {"notes", notes},
          {"provenance", provenance},
          {"wall_seconds", wall_seconds}};
}

std::string VerificationReport::stats_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format17(row[i]);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rate

VerificationReport assess_rate(std::span<const std::size_t> n_list,
                               std::span<const double> values,
                               const RateConfig& cfg) {
  if (n_list.size() != values.size()) {
    throw InvalidArgument("assess_rate: n_list and values differ in length");
  }
  if (n_list.size() < 2) throw InvalidArgument("assess_rate: need at least two n");
  VerificationReport rep;
  rep.campaign = "rate";
  rep.config = {{"target", cfg.target.to_json()},
                {"statistic", to_string(cfg.statistic)},
                {"tolerance", cfg.tolerance},
                {"two_sided", cfg.two_sided}};
  rep.columns = {"n", "value"};
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    rep.rows.push_back({static_cast<double>(n_list[i]), values[i]});
  }
  if (std::any_of(values.begin(), values.end(), [](double v) { return !(v > 0.0); })) {
    rep.degenerate = true;
    rep.notes.push_back("some fluctuation statistic is zero; no decay to fit");
    rep.add(make("positive_statistics", 0.0, 1.0, ">="));
    return rep;
  }
  std::vector<double> x(n_list.size()), y(n_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    x[i] = static_cast<double>(n_list[i]);
    y[i] = std::log(values[i]);
  }

  if (cfg.target.kind == RateTarget::Kind::kExponential) {
    const stats::LinearFit f = stats::fit_line(x, y);
    const double target = cfg.target.expected_slope(cfg.statistic);
    const double tol = cfg.tolerance * std::abs(target);
    rep.fits = {{"regressor", "n"},          {"slope", f.slope},
                {"slope_se", f.slope_se},    {"intercept", f.intercept},
                {"target_slope", target},    {"relative_error", (f.slope - target) / std::abs(target)}};
    rep.notes.push_back(
        "almost-sure o(.) rate tested through the decay of " + to_string(cfg.statistic) +
        " of |W_hat - W_n|; slope standard errors ignore the correlation between n "
        "on shared paths");
    rep.add(make("slope_upper", f.slope, target + tol, "<=",
                 "fitted slope at least as steep as the target within tolerance"));
    if (cfg.two_sided) {
      rep.add(make("slope_lower", f.slope, target - tol, ">=",
                   "fitted slope within the tolerance band"));
    }
    return rep;
  }

  // Polynomial: the fitted log-log slope is informational.
  std::vector<double> lx(x.size());
  std::transform(x.begin(), x.end(), lx.begin(), [](double v) { return std::log(v); });
  const stats::LinearFit f = stats::fit_line(lx, y);
  rep.fits = {{"regressor", "log n"}, {"slope", f.slope}, {"slope_se", f.slope_se},
              {"intercept", f.intercept}};
  const double mid = 0.5 * (x.front() + x.back());
  std::vector<double> scaled;
  rep.columns.push_back("scaled");
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = std::pow(x[i], cfg.target.alpha) * values[i];
    rep.rows[i].push_back(s);
    if (x[i] >= mid) scaled.push_back(s);
  }
  rep.add(make("scaled_decreasing_top_half", static_cast<double>(non_decreases(scaled)),
               0.0, "==",
               "heuristic: n^alpha * statistic strictly decreasing for n >= " +
                   format17(mid)));
  return rep;
}

VerificationReport check_rate(const EnvironmentModel& model, const RateConfig& cfg,
                              const CampaignOptions& opts) {
  const Stopwatch clock;
  require_ascending(cfg.n_list, "check_rate");
  if (cfg.reps < 1000) throw InvalidArgument("check_rate: reps must be >= 1000");
  if (opts.extra_depth < 1) throw InvalidArgument("check_rate: extra_depth must be >= 1");
  const std::size_t n_max = cfg.n_list.back();
  const std::size_t depth = n_max + opts.extra_depth;
  const EnvironmentSequence env = realize(model, depth, opts.env_seed);

  const double tail_depth = delta2_tail(env, depth);
  const double tail_nmax = delta2_tail(env, n_max);
  nlohmann::json config = {{"model", model.describe()},
                           {"n_list", cfg.n_list},
                           {"reps", cfg.reps},
                           {"target", cfg.target.to_json()},
                           {"statistic", to_string(cfg.statistic)},
                           {"tolerance", cfg.tolerance},
                           {"two_sided", cfg.two_sided},
                           {"max_residual_fraction", kMaxResidualFraction}};

  if (tail_nmax == 0.0) {
    VerificationReport rep;
    rep.campaign = "rate";
    rep.config = config;
    rep.degenerate = true;
    rep.notes.push_back("every law from generation " + std::to_string(n_max) +
                        " on is a point mass: all fluctuations are 0");
    rep.add(make("nondegenerate_fluctuations", 0.0, 0.0, ">"));
    rep.provenance = options_json(opts);
    rep.wall_seconds = clock.seconds();
    return rep;
  }
  const double residual = std::sqrt(tail_depth / tail_nmax);
  if (residual > kMaxResidualFraction) {
    throw EstimatorInvalid("check_rate: estimator residual sd is " + format17(residual) +
                           " of the smallest fluctuation scale (limit " +
                           format17(kMaxResidualFraction) + "); increase extra_depth");
  }

  const std::size_t k = cfg.n_list.size();
  std::vector<std::vector<double>> dw(k, std::vector<double>(cfg.reps));
  const std::uint64_t traj_base = substream(opts.seed, Stream::kTrajectory);
  for_each_block(
      cfg.reps, opts.workers,
      [&](std::size_t r) {
        return summarize_path(env, cfg.n_list, depth, mix(traj_base, r), opts.cap);
      },
      [&](std::size_t first, const std::vector<PathSummary>& part) {
        for (std::size_t i = 0; i < part.size(); ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            dw[j][first + i] = part[i].w_hat - part[i].w_at[j];
          }
        }
      });

  std::vector<double> chosen(k);
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < k; ++j) {
    const stats::Moments m = stats::moments(dw[j]);
    std::vector<double> absv(cfg.reps);
    CompensatedSum abs_sum, sq_sum;
    for (std::size_t r = 0; r < cfg.reps; ++r) {
      absv[r] = std::abs(dw[j][r]);
      abs_sum += absv[r];
      sq_sum += dw[j][r] * dw[j][r];
    }
    const double reps = static_cast<double>(cfg.reps);
    const double mean_abs = abs_sum.value() / reps;
    const double mean_sq = sq_sum.value() / reps;
    const double med = stats::median(std::move(absv));
    const double analytic = delta2_tail(env, cfg.n_list[j]) - tail_depth;
    rows.push_back({static_cast<double>(cfg.n_list[j]), reps, m.mean, m.std_error,
                    mean_abs, mean_sq, med, analytic});
    switch (cfg.statistic) {
      case RateStatistic::kMeanAbs:
        chosen[j] = mean_abs;
        break;
      case RateStatistic::kMeanSquare:
        chosen[j] = mean_sq;
        break;
      case RateStatistic::kMedianAbs:
        chosen[j] = med;
        break;
    }
  }

  VerificationReport rep = assess_rate(cfg.n_list, chosen, cfg);
  rep.config = config;
  rep.columns = {"n", "reps", "mean_dw", "se_dw", "mean_abs", "mean_square",
                 "median_abs", "analytic_mean_square"};
  if (cfg.target.kind == RateTarget::Kind::kPolynomial) rep.columns.push_back("scaled");
  for (std::size_t j = 0; j < k; ++j) {
    if (cfg.target.kind == RateTarget::Kind::kPolynomial) {
      rows[j].push_back(std::pow(static_cast<double>(cfg.n_list[j]), cfg.target.alpha) *
                        chosen[j]);
    }
  }
  rep.rows = std::move(rows);
  rep.details["residual_sd_fraction"] = residual;
  rep.details["estimator_depth"] = depth;

  if (cfg.target.kind == RateTarget::Kind::kPolynomial && cfg.series_paths > 0) {
    // Partial sums S_k = sum_{n <= k} (W_hat - W_n), k <= horizon. Cauchy-type
    // decay: the late oscillation max_{k >= horizon / 2} |S_k - S_horizon|
    // relative to max_k |S_k|.
    const std::size_t h = cfg.series_horizon;
    const std::size_t series_depth = h + opts.extra_depth;
    const EnvironmentSequence senv = env.extended(series_depth);
    const double sres = std::sqrt(delta2_tail(senv, series_depth) / delta2_tail(senv, h));
    if (sres > kMaxResidualFraction) {
      throw EstimatorInvalid("check_rate: series heuristic residual too large");
    }
    std::vector<std::size_t> gens(h + 1);
    std::iota(gens.begin(), gens.end(), std::size_t{0});
    const std::uint64_t sbase = substream(opts.seed, Stream::kCampaign);
    const auto ratios = parallel_map(cfg.series_paths, opts.workers, [&](std::size_t r) {
      const PathSummary s = summarize_path(senv, gens, series_depth, mix(sbase, r), opts.cap);
      std::vector<double> partial(h + 1);
      double acc = 0.0;
      double scale = 0.0;
      for (std::size_t i = 0; i <= h; ++i) {
        acc += s.w_hat - s.w_at[i];
        partial[i] = acc;
        scale = std::max(scale, std::abs(acc));
      }
      double late = 0.0;
      for (std::size_t i = h / 2; i <= h; ++i) {
        late = std::max(late, std::abs(partial[i] - partial[h]));
      }
      return scale > 0.0 ? late / scale : 0.0;
    });
    const double med = stats::median(ratios);
    rep.details["series_heuristic"] = {{"paths", cfg.series_paths},
                                       {"horizon", h},
                                       {"median_late_oscillation_ratio", med}};
    rep.config["series_ratio_max"] = 0.05;
    rep.add(make("series_partial_sums_settle", med, 0.05, "<=",
                 "heuristic: partial sums of (W_hat - W_n) settle by n = " +
                     std::to_string(h)));
  }
  rep.provenance = options_json(opts);
  rep.wall_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// CLT

namespace {

struct ReplicateU {
  std::vector<double> u;
  double residual = 0.0;
};

// KS distance per n between the U_n sample and a limit sample.
std::vector<double> ks_against(std::vector<std::vector<double>>& u,
                               const std::vector<double>& limit_sorted) {
  std::vector<double> out;
  for (auto& sample : u) {
    std::sort(sample.begin(), sample.end());
    out.push_back(stats::ks_distance(sample, limit_sorted));
  }
  return out;
}

struct CltRun {
  std::vector<double> ks;
  std::vector<double> u_mean;
  std::vector<double> u_var;
  double residual = 0.0;
};

void fill_u_moments(CltRun& run, const std::vector<std::vector<double>>& u) {
  for (const auto& s : u) {
    const stats::Moments m = stats::moments(s);
    run.u_mean.push_back(m.mean);
    run.u_var.push_back(m.variance);
  }
}

void check_residual(double residual) {
  if (residual > kMaxResidualFraction) {
    throw EstimatorInvalid("check_clt: estimator residual sd is " + format17(residual) +
                           " of the U_n scale (limit " + format17(kMaxResidualFraction) +
                           "); increase extra_depth");
  }
}

CltRun annealed_run(const EnvironmentModel& model, const CltConfig& cfg,
                    const CampaignOptions& opts, std::uint64_t env_seed,
                    std::uint64_t seed, std::size_t limit_depth) {
  const std::size_t k = cfg.n_list.size();
  const std::size_t depth = cfg.n_list.back() + opts.extra_depth;
  const std::uint64_t traj_base = substream(seed, Stream::kTrajectory);
  const auto reps = parallel_map(cfg.reps, opts.workers, [&](std::size_t r) {
    const EnvironmentSequence env = realize(model, depth, mix(env_seed, r));
    const PathSummary s =
        summarize_path(env, cfg.n_list, depth, mix(traj_base, r), opts.cap);
    ReplicateU out;
    out.u.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t n = cfg.n_list[j];
      out.u[j] = u_statistic(log_Pn(env, n), delta2_shifted(env, n), s.w_at[j], s.w_hat);
    }
    out.residual = std::sqrt(delta2_tail(env, depth) / delta2_tail(env, cfg.n_list.back()));
    return out;
  });
  CltRun run;
  std::vector<std::vector<double>> u(k, std::vector<double>(cfg.reps));
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    for (std::size_t j = 0; j < k; ++j) u[j][r] = reps[r].u[j];
    run.residual = std::max(run.residual, reps[r].residual);
  }
  check_residual(run.residual);
  const LimitEstimate limit =
      limit_law_sample(model, cfg.reps, limit_depth,
                       substream(env_seed, Stream::kLimitEnvironment),
                       substream(seed, Stream::kLimitLaw), opts.workers);
  fill_u_moments(run, u);
  run.ks = ks_against(u, limit.sample);
  return run;
}

CltRun quenched_run(const EnvironmentSequence& env, const CltConfig& cfg,
                    const CampaignOptions& opts, std::uint64_t seed,
                    std::size_t limit_depth) {
  const std::size_t k = cfg.n_list.size();
  const std::size_t depth = cfg.n_list.back() + opts.extra_depth;
  CltRun run;
  run.residual = std::sqrt(delta2_tail(env, depth) / delta2_tail(env, cfg.n_list.back()));
  check_residual(run.residual);
  std::vector<double> log_pn(k), delta(k);
  for (std::size_t j = 0; j < k; ++j) {
    log_pn[j] = log_Pn(env, cfg.n_list[j]);
    delta[j] = delta2_shifted(env, cfg.n_list[j]);
  }
  const std::uint64_t traj_base = substream(seed, Stream::kTrajectory);
  const auto paths = parallel_map(cfg.reps, opts.workers, [&](std::size_t r) {
    return summarize_path(env, cfg.n_list, depth, mix(traj_base, r), opts.cap);
  });
  std::vector<std::vector<double>> u(k, std::vector<double>(cfg.reps));
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      u[j][r] = u_statistic(log_pn[j], delta[j], paths[r].w_at[j], paths[r].w_hat);
    }
  }
  const LimitEstimate limit = limit_law_sample(
      env, cfg.reps, limit_depth, substream(seed, Stream::kLimitLaw), opts.workers);
  fill_u_moments(run, u);
  run.ks = ks_against(u, limit.sample);
  return run;
}

}  // namespace

VerificationReport check_clt(const EnvironmentModel& model, const CltConfig& cfg,
                             const CampaignOptions& opts) {
  const Stopwatch clock;
  require_ascending(cfg.n_list, "check_clt");
  if (cfg.reps < 2) throw InvalidArgument("check_clt: reps must be >= 2");
  if (cfg.env_reps < 1 || cfg.repeats < 1) {
    throw InvalidArgument("check_clt: env_reps and repeats must be >= 1");
  }
  if (cfg.n_list.front() < 1) throw InvalidArgument("check_clt: n must be >= 1");
  if (!model.nondegenerate()) {
    throw HypothesisError(
        "check_clt: the limit theorem for sqrt(P_n)(W - W_n) / delta_inf(T^n xi) "
        "requires p_i(xi_0) < 1 a.s. for all i, but some possible law is a point mass");
  }
  const std::size_t k = cfg.n_list.size();
  const std::size_t limit_depth =
      cfg.limit_depth > 0 ? cfg.limit_depth : cfg.n_list.back() + opts.extra_depth;
  const double threshold = stats::ks_threshold(cfg.reps, cfg.reps, cfg.alpha);
  const double final_max = cfg.final_ks_max.value_or(threshold);
  const bool quenched = cfg.mode == SamplingMode::kQuenched;

  VerificationReport rep;
  rep.campaign = "clt";
  rep.config = {{"model", model.describe()},
                {"n_list", cfg.n_list},
                {"reps", cfg.reps},
                {"mode", quenched ? "quenched" : "annealed"},
                {"env_reps", cfg.env_reps},
                {"repeats", cfg.repeats},
                {"min_pass_fraction", cfg.min_pass_fraction},
                {"alpha", cfg.alpha},
                {"ks_threshold", threshold},
                {"final_ks_max", final_max},
                {"limit_depth", limit_depth},
                {"max_residual_fraction", kMaxResidualFraction}};

  std::vector<std::vector<double>> ks_runs;  // per repeat, averaged over envs
  nlohmann::json runs = nlohmann::json::array();
  double residual = 0.0;
  std::size_t passes = 0;
  std::vector<double> u_mean0, u_var0;
  for (std::size_t i = 0; i < cfg.repeats; ++i) {
    const std::uint64_t seed = cfg.repeats == 1 ? opts.seed : mix(opts.seed, i);
    const std::uint64_t env_seed = cfg.repeats == 1 ? opts.env_seed : mix(opts.env_seed, i);
    std::vector<double> ks(k, 0.0);
    nlohmann::json per_env = nlohmann::json::array();
    if (!quenched) {
      CltRun run = annealed_run(model, cfg, opts, env_seed, seed, limit_depth);
      ks = run.ks;
      residual = std::max(residual, run.residual);
      if (i == 0) {
        u_mean0 = run.u_mean;
        u_var0 = run.u_var;
      }
    } else {
      const std::size_t depth = std::max(cfg.n_list.back() + opts.extra_depth, limit_depth);
      for (std::size_t e = 0; e < cfg.env_reps; ++e) {
        const std::uint64_t es = cfg.env_reps == 1 ? env_seed : mix(env_seed, e);
        const std::uint64_t ts = cfg.env_reps == 1 ? seed : mix(seed, e);
        const EnvironmentSequence env = realize(model, depth, es);
        CltRun run = quenched_run(env, cfg, opts, ts, limit_depth);
        for (std::size_t j = 0; j < k; ++j) ks[j] += run.ks[j] / static_cast<double>(cfg.env_reps);
        residual = std::max(residual, run.residual);
        per_env.push_back(run.ks);
        if (i == 0 && e == 0) {
          u_mean0 = run.u_mean;
          u_var0 = run.u_var;
        }
      }
    }
    const bool ok = non_decreases(ks) == 0 && ks.back() <= final_max;
    passes += ok ? 1 : 0;
    nlohmann::json r = {{"seed", seed}, {"env_seed", env_seed}, {"ks", ks}, {"pass", ok}};
    if (quenched) r["ks_per_environment"] = per_env;
    runs.push_back(r);
    ks_runs.push_back(std::move(ks));
  }

  rep.columns = {"n", "runs", "ks_mean", "ks_min", "ks_max", "ks_threshold",
                 "u_mean_first_run", "u_var_first_run"};
  std::vector<double> ks_mean(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> col;
    for (const auto& run : ks_runs) col.push_back(run[j]);
    const stats::Moments m = stats::moments(col);
    ks_mean[j] = m.mean;
    rep.rows.push_back({static_cast<double>(cfg.n_list[j]),
                        static_cast<double>(col.size()), m.mean,
                        *std::min_element(col.begin(), col.end()),
                        *std::max_element(col.begin(), col.end()), threshold,
                        u_mean0[j], u_var0[j]});
  }
  rep.details = {{"runs", runs}, {"residual_sd_fraction", residual}};
  const std::string what = quenched && cfg.env_reps > 1 ? "environment-averaged KS" : "KS";
  if (cfg.repeats == 1) {
    if (k > 1) {
      rep.add(make("ks_decreasing", static_cast<double>(non_decreases(ks_runs[0])), 0.0, "==",
                   what + " strictly decreasing across n_list"));
    }
    rep.add(make("final_ks", ks_runs[0].back(), final_max, "<=",
                 what + " at the largest n"));
  } else {
    rep.add(make("pass_fraction",
                 static_cast<double>(passes) / static_cast<double>(cfg.repeats),
                 cfg.min_pass_fraction, ">=",
                 "fraction of seeded campaigns with " + what +
                     " decreasing and final value below final_ks_max"));
  }
  rep.provenance = options_json(opts);
  rep.wall_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Tails

TailAnalysis analyze_tail(std::span<const TailCounts> cells, double log_m_min,
                          const TailConfig& cfg) {
  TailAnalysis a;
  std::vector<double> x, z, w, yy;
  for (const auto& c : cells) {
    if (c.reps == 0) throw InvalidArgument("analyze_tail: reps must be >= 1");
    const bool censored = c.exceed < std::max<std::uint64_t>(cfg.min_count, 1) ||
                          c.exceed >= c.reps;
    a.censored.push_back(censored);
    if (censored) {
      a.y.push_back(kNaN);
      continue;
    }
    const double p = static_cast<double>(c.exceed) / static_cast<double>(c.reps);
    const double y = std::log(-std::log(p));
    a.y.push_back(y);
    x.push_back(static_cast<double>(c.n));
    z.push_back(std::log(p));
    // Delta method: Var log p_hat = (1 - p) / (reps p).
    w.push_back(static_cast<double>(c.exceed) / (1.0 - p));
    yy.push_back(y);
  }
  if (x.size() < 2) return a;
  a.increasing = std::adjacent_find(yy.begin(), yy.end(), std::greater_equal<>()) == yy.end();
  a.mean_increment = (yy.back() - yy.front()) / (x.back() - x.front());
  if (x.size() >= 3) {
    const stats::LinearFit f = stats::fit_line_weighted(x, z, w);
    a.lack_of_fit_chi2 = f.rss;
    a.lack_of_fit_critical =
        stats::chi2_upper_quantile(static_cast<double>(x.size() - 2), cfg.lack_of_fit_alpha);
    a.geometric_rejected = a.lack_of_fit_chi2 > a.lack_of_fit_critical;
  }
  const double threshold = (1.0 - cfg.tolerance) * log_m_min / 3.0;
  a.supergeometric = a.increasing && a.mean_increment >= threshold && a.geometric_rejected;
  return a;
}

VerificationReport check_tail(const EnvironmentModel& model, const TailConfig& cfg,
                              const CampaignOptions& opts) {
  const Stopwatch clock;
  require_ascending(cfg.n_list, "check_tail");
  if (cfg.eps_list.empty()) throw InvalidArgument("check_tail: eps_list is empty");
  for (double e : cfg.eps_list) {
    if (!(e > 0.0)) throw InvalidArgument("check_tail: every eps must be > 0");
  }
  if (cfg.reps < 1) throw InvalidArgument("check_tail: reps must be >= 1");
  if (!finitely_many_states(model) || !model.strongly_supercritical() ||
      !model.nondegenerate()) {
    throw HypothesisError(
        "check_tail: the supergeometric tail bound requires finitely many environment "
        "states with p_0(xi_0) = 0 and p_1(xi_0) < 1 a.s.");
  }
  const double m_min = model.min_mean();
  const double log_m_min = std::log(m_min);
  const std::size_t depth = cfg.n_list.back() + opts.extra_depth;
  const double eps_min = *std::min_element(cfg.eps_list.begin(), cfg.eps_list.end());
  // Var(W - W_N | xi) <= c_max sum_{k >= N} m_min^-k for every realization.
  const double bound = max_variance_ratio(model) * std::pow(m_min, -static_cast<double>(depth)) /
                       (1.0 - 1.0 / m_min);
  const double residual = std::sqrt(bound) / eps_min;
  if (residual > kMaxResidualFraction) {
    throw EstimatorInvalid("check_tail: estimator residual sd bound is " + format17(residual) +
                           " of the smallest eps; increase extra_depth");
  }

  const std::size_t k = cfg.n_list.size();
  const std::size_t ne = cfg.eps_list.size();
  std::vector<std::uint64_t> exceed(k * ne, 0);
  const std::uint64_t traj_base = substream(opts.seed, Stream::kTrajectory);
  for_each_block(
      cfg.reps, opts.workers,
      [&](std::size_t r) {
        const EnvironmentSequence env = realize(model, depth, mix(opts.env_seed, r));
        const PathSummary s = summarize_path(env, cfg.n_list, depth, mix(traj_base, r), opts.cap);
        std::vector<double> d(k);
        for (std::size_t j = 0; j < k; ++j) d[j] = std::abs(s.w_hat - s.w_at[j]);
        return d;
      },
      [&](std::size_t, const std::vector<std::vector<double>>& part) {
        for (const auto& d : part) {
          for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t e = 0; e < ne; ++e) {
              if (d[j] > cfg.eps_list[e]) ++exceed[j * ne + e];
            }
          }
        }
      });

  VerificationReport rep;
  rep.campaign = "tail";
  const double inc_threshold = (1.0 - cfg.tolerance) * log_m_min / 3.0;
  rep.config = {{"model", model.describe()},
                {"n_list", cfg.n_list},
                {"eps_list", cfg.eps_list},
                {"reps", cfg.reps},
                {"tolerance", cfg.tolerance},
                {"lack_of_fit_alpha", cfg.lack_of_fit_alpha},
                {"min_count", cfg.min_count},
                {"m_min", m_min},
                {"increment_threshold", inc_threshold},
                {"max_residual_fraction", kMaxResidualFraction}};
  rep.columns = {"n", "eps", "exceed", "reps", "p_hat", "wilson_lo", "wilson_hi", "y"};
  nlohmann::json per_eps = nlohmann::json::array();
  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<TailCounts> cells;
    for (std::size_t j = 0; j < k; ++j) {
      cells.push_back({cfg.n_list[j], cfg.eps_list[e], exceed[j * ne + e], cfg.reps});
    }
    const TailAnalysis a = analyze_tail(cells, log_m_min, cfg);
    for (std::size_t j = 0; j < k; ++j) {
      const auto& c = cells[j];
      const stats::Interval ci = stats::wilson(c.exceed, c.reps);
      rep.rows.push_back({static_cast<double>(c.n), c.eps, static_cast<double>(c.exceed),
                          static_cast<double>(c.reps),
                          static_cast<double>(c.exceed) / static_cast<double>(c.reps),
                          ci.lo, ci.hi, a.y[j]});
      if (c.exceed == 0) {
        rep.notes.push_back("n = " + std::to_string(c.n) + ", eps = " + format17(c.eps) +
                            ": no exceedances; censored, p < " + format17(ci.hi));
      }
    }
    const std::string tag = "eps=" + short_label(cfg.eps_list[e]) + ": ";
    const auto uncensored = static_cast<std::size_t>(
        std::count(a.censored.begin(), a.censored.end(), false));
    rep.add(make(tag + "uncensored_points", static_cast<double>(uncensored), 3.0, ">=",
                 "cells with at least min_count exceedances"));
    rep.add(make(tag + "y_increasing", a.increasing ? 1.0 : 0.0, 1.0, "==",
                 "log(-log p_hat) strictly increasing in n"));
    rep.add(make(tag + "mean_increment", a.mean_increment, inc_threshold, ">=",
                 "(1 - tolerance) log(m_min) / 3"));
    rep.add(make(tag + "geometric_fit_rejected", a.lack_of_fit_chi2, a.lack_of_fit_critical,
                 ">", "weighted lack-of-fit chi-square of log p_hat linear in n"));
    per_eps.push_back({{"eps", cfg.eps_list[e]},
                       {"supergeometric", a.supergeometric},
                       {"mean_increment", a.mean_increment},
                       {"lack_of_fit_chi2", a.lack_of_fit_chi2},
                       {"lack_of_fit_critical", a.lack_of_fit_critical}});
  }
  rep.details = {{"per_eps", per_eps}, {"residual_sd_fraction", residual}};
  if (ne > 1) {
    rep.notes.push_back(
        "eps^(2/3) scaling across eps_list is informational only; see statistics");
  }
  rep.provenance = options_json(opts);
  rep.wall_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Exponential moments

std::string to_string(MgfVerdict v) {
  switch (v) {
    case MgfVerdict::kStable:
      return "stable";
    case MgfVerdict::kDivergent:
      return "divergent";
    case MgfVerdict::kUnresolved:
      return "unresolved";
  }
  return "unknown";
}

MgfProbe probe_mgf(const EnvironmentSequence& env, double t, std::size_t n_cap) {
  if (n_cap < 1) throw InvalidArgument("probe_mgf: n_cap must be >= 1");
  n_cap = std::min(n_cap, kMaxMgfDepth);
  std::vector<std::size_t> ladder;
  for (std::size_t d = 10; d < n_cap; d *= 2) ladder.push_back(d);
  ladder.push_back(n_cap);
  MgfProbe p;
  double previous = kNaN;
  for (std::size_t d : ladder) {
    double v = 0.0;
    try {
      v = quenched_mgf(env, t, d);
    } catch (const DivergenceError& e) {
      p.verdict = MgfVerdict::kDivergent;
      p.message = e.what();
      return p;
    }
    previous = p.value;
    p.value = v;
    p.depth = d;
  }
  const bool settled = ladder.size() == 1 || std::abs(p.value - previous) <= 1e-9 * p.value;
  p.verdict = settled ? MgfVerdict::kStable : MgfVerdict::kUnresolved;
  if (!settled) p.message = "psi_n(t) still changing at depth " + std::to_string(p.depth);
  return p;
}

VerificationReport check_exp_moment(const EnvironmentModel& model, const MgfConfig& cfg,
                                    const CampaignOptions& opts) {
  const Stopwatch clock;
  if (cfg.t_grid.empty()) throw InvalidArgument("check_exp_moment: t_grid is empty");
  if (!std::is_sorted(cfg.t_grid.begin(), cfg.t_grid.end())) {
    throw InvalidArgument("check_exp_moment: t_grid must be ascending");
  }
  if (!finitely_many_states(model)) {
    throw HypothesisError("check_exp_moment: requires finitely many environment states");
  }
  const std::size_t n_cap = std::min(cfg.n_cap, kMaxMgfDepth);
  const EnvironmentSequence base = realize(model, n_cap + 1, opts.env_seed);

  // Environments probed: the realization itself for a varying environment,
  // otherwise each possible state followed by the realization.
  std::vector<std::pair<std::string, EnvironmentSequence>> prefixes;
  if (model.kind() == EnvironmentKind::kDeterministic) {
    prefixes.emplace_back("realized", base);
  } else {
    for (std::size_t s : model.possible_states()) {
      std::vector<OffspringLaw> laws{model.law(s)};
      for (std::size_t i = 0; i < n_cap; ++i) laws.push_back(base.law(i));
      prefixes.emplace_back("state " + std::to_string(s),
                            EnvironmentSequence::of_laws(std::move(laws)));
    }
  }

  VerificationReport rep;
  rep.campaign = "mgf";
  nlohmann::json expect = nlohmann::json::array();
  for (const auto& e : cfg.expect) {
    nlohmann::json j = {{"t", e.t}, {"tolerance", e.tolerance}};
    if (e.value) j["value"] = *e.value;
    if (e.divergent) j["divergent"] = *e.divergent;
    expect.push_back(j);
  }
  rep.config = {{"model", model.describe()}, {"t_grid", cfg.t_grid}, {"n_cap", n_cap},
                {"expect", expect}, {"mc_reps", cfg.mc_reps}, {"mc_depth", cfg.mc_depth},
                {"mc_sigma", 3.0}};
  if (cfg.mc_t) rep.config["mc_t"] = *cfg.mc_t;
  rep.columns = {"prefix", "t", "verdict", "value", "depth"};
  nlohmann::json frontier = nlohmann::json::array();
  std::size_t violations = 0;
  std::vector<std::vector<MgfProbe>> probes(prefixes.size());
  for (std::size_t pi = 0; pi < prefixes.size(); ++pi) {
    bool seen_unstable = false;
    double t_ok = kNaN;
    double t_div = kNaN;
    for (double t : cfg.t_grid) {
      const MgfProbe p = probe_mgf(prefixes[pi].second, t, n_cap);
      probes[pi].push_back(p);
      rep.rows.push_back({static_cast<double>(pi), t, static_cast<double>(p.verdict),
                          p.verdict == MgfVerdict::kDivergent ? kNaN : p.value,
                          static_cast<double>(p.depth)});
      if (p.verdict == MgfVerdict::kStable) {
        if (seen_unstable) ++violations;
        else t_ok = t;
      } else {
        if (!seen_unstable) t_div = t;
        seen_unstable = true;
      }
    }
    frontier.push_back({{"prefix", prefixes[pi].first},
                        {"t_ok", t_ok},
                        {"t_div", t_div}});
  }
  rep.details["radius_interval"] = frontier;
  rep.details["verdict_codes"] = {{"0", "stable"}, {"1", "divergent"}, {"2", "unresolved"}};
  rep.add(make("monotone_frontier", static_cast<double>(violations), 0.0, "==",
               "no stable t above a non-stable one"));

  for (const auto& e : cfg.expect) {
    for (std::size_t pi = 0; pi < prefixes.size(); ++pi) {
      const MgfProbe p = probe_mgf(prefixes[pi].second, e.t, n_cap);
      const std::string tag = prefixes[pi].first + ", t=" + short_label(e.t) + ": ";
      if (e.divergent) {
        const bool div = p.verdict == MgfVerdict::kDivergent;
        rep.add(make(tag + (*e.divergent ? "divergent" : "not_divergent"),
                     div == *e.divergent ? 1.0 : 0.0, 1.0, "==", p.message));
      }
      if (e.value) {
        const double err = p.verdict == MgfVerdict::kStable
                               ? std::abs(p.value - *e.value)
                               : std::numeric_limits<double>::infinity();
        rep.add(make(tag + "psi_error", err, e.tolerance, "<=",
                     "psi_" + std::to_string(p.depth) + "(t) = " + format17(p.value) +
                         " vs expected " + format17(*e.value)));
      }
    }
  }

  if (cfg.mc_t) {
    const double t = *cfg.mc_t;
    const EnvironmentSequence& env = prefixes.front().second;
    const std::size_t d = cfg.mc_depth;
    const EnvironmentSequence e = env.extended(d);
    const std::uint64_t traj_base = substream(opts.seed, Stream::kTrajectory);
    const auto vals = parallel_map(cfg.mc_reps, opts.workers, [&](std::size_t r) {
      const Trajectory tr = simulate(e, d, mix(traj_base, r), opts.cap);
      if (tr.capped) throw EstimatorInvalid("check_exp_moment: population cap reached");
      return std::exp(t * tr.w.back());
    });
    const stats::Moments m = stats::moments(vals);
    const double psi_d = quenched_mgf(e, t, d);
    rep.details["monte_carlo"] = {{"t", t},
                                  {"depth", d},
                                  {"reps", cfg.mc_reps},
                                  {"mean", m.mean},
                                  {"std_error", m.std_error},
                                  {"psi_depth", psi_d}};
    rep.add(make(prefixes.front().first + ", t=" + short_label(t) + ": mc_z_score",
                 m.std_error > 0.0 ? std::abs(m.mean - psi_d) / m.std_error : 0.0, 3.0, "<=",
                 "|mean exp(t W_depth) - psi_depth(t)| in Monte Carlo standard errors"));
  }
  rep.provenance = options_json(opts);
  rep.wall_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------------------
// Calibration

SamplerEquivalence sampler_equivalence(std::span<const OffspringLaw> laws,
                                       std::size_t max_z, std::size_t draws,
                                       std::uint64_t seed, unsigned workers) {
  if (laws.empty() || max_z < 1 || draws < 1) {
    throw InvalidArgument("sampler_equivalence: empty configuration");
  }
  const std::size_t trials = laws.size() * max_z;
  const double threshold = stats::ks_threshold(draws, draws, 0.01);
  const auto rejected = parallel_map(trials, workers, [&](std::size_t i) {
    const OffspringLaw& law = laws[i / max_z];
    const std::uint64_t z = i % max_z + 1;
    Rng fast(mix(seed, 2 * i));
    Rng naive(mix(seed, 2 * i + 1));
    std::vector<double> a(draws), b(draws);
    for (std::size_t r = 0; r < draws; ++r) {
      a[r] = static_cast<double>(law.sample_total(z, fast));
      std::uint64_t s = 0;
      for (std::uint64_t c = 0; c < z; ++c) s += law.sample_one(naive);
      b[r] = static_cast<double>(s);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return stats::ks_distance(a, b) > threshold ? 1 : 0;
  });
  SamplerEquivalence out;
  out.trials = trials;
  out.rejections = static_cast<std::size_t>(std::accumulate(rejected.begin(), rejected.end(), 0));
  out.allowed_fraction = 0.01 + 3.0 * std::sqrt(0.01 * 0.99 / static_cast<double>(trials));
  out.pass = static_cast<double>(out.rejections) / static_cast<double>(trials) <=
             out.allowed_fraction;
  return out;
}

VerificationReport run_calibration(const CalibrationConfig& cfg,
                                   const CampaignOptions& opts) {
  const Stopwatch clock;
  VerificationReport rep;
  rep.campaign = "calibration";
  rep.config = {{"tail_instances", cfg.tail_instances},
                {"tail_reps", cfg.tail_reps},
                {"sampler_draws", cfg.sampler_draws},
                {"sampler_max_z", cfg.sampler_max_z},
                {"ks_campaigns", cfg.ks_campaigns},
                {"ks_reps", cfg.ks_reps},
                {"ks_min_pass_fraction", cfg.ks_min_pass_fraction},
                {"rate_slope_max_error", 1e-12},
                {"supergeometric_increment_max_error", 1e-3}};

  // Rate regression on an exact exponential: |W - W_n| = 2^(-n/2).
  {
    std::vector<std::size_t> ns;
    std::vector<double> vals;
    for (std::size_t n = 4; n <= 14; ++n) {
      ns.push_back(n);
      vals.push_back(std::exp2(-0.5 * static_cast<double>(n)));
    }
    RateConfig rc;
    rc.target = RateTarget::exponential(std::log(2.0), 2.0);
    rc.statistic = RateStatistic::kMeanAbs;
    const VerificationReport r = assess_rate(ns, vals, rc);
    const double slope = r.fits["slope"].get<double>();
    rep.details["synthetic_rate"] = r.fits;
    rep.add(make("synthetic_rate_slope_error", std::abs(slope + 0.5 * std::log(2.0)), 1e-12,
                 "<=", "exact exponential input recovers slope -log(2)/2"));
  }

  // Tail analysis on constructed inputs.
  TailConfig tc;
  const std::uint64_t reps = cfg.tail_reps;
  auto cells_from = [&](auto p_of_n) {
    std::vector<TailCounts> cells;
    for (std::size_t n = 2; n <= 8; ++n) {
      const double p = p_of_n(static_cast<double>(n));
      cells.push_back({n, 0.1, static_cast<std::uint64_t>(std::llround(p * static_cast<double>(reps))),
                       reps});
    }
    return cells;
  };
  {
    const auto super = analyze_tail(
        cells_from([](double n) { return std::exp(-std::exp2(n / 3.0)); }), std::log(2.0), tc);
    rep.add(make("synthetic_supergeometric_flagged", super.supergeometric ? 1.0 : 0.0, 1.0, "==",
                 "p(n) = exp(-2^(n/3)) is flagged supergeometric"));
    rep.add(make("synthetic_supergeometric_increment_error",
                 std::abs(super.mean_increment - std::log(2.0) / 3.0), 1e-3, "<=",
                 "mean increment of log(-log p) equals log(2)/3"));
    const auto geo = analyze_tail(cells_from([](double n) { return std::exp2(-n); }),
                                  std::log(2.0), tc);
    rep.add(make("synthetic_geometric_exact_flagged", geo.supergeometric ? 1.0 : 0.0, 0.0, "==",
                 "p(n) = 2^-n is not flagged"));
  }
  {
    Rng rng(substream(opts.seed, Stream::kCampaign));
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < cfg.tail_instances; ++i) {
      const double c = 0.2 + 0.8 * rng.uniform();
      const double r = 0.3 + 0.5 * rng.uniform();
      std::vector<TailCounts> cells;
      for (std::size_t n = 2; n <= 8; ++n) {
        const double p = c * std::pow(r, static_cast<double>(n));
        cells.push_back({n, 0.1, dist::binomial(rng, reps, p), reps});
      }
      if (analyze_tail(cells, std::log(2.0), tc).supergeometric) ++flagged;
    }
    rep.add(make("synthetic_geometric_random_flagged", static_cast<double>(flagged), 0.0, "==",
                 std::to_string(cfg.tail_instances) +
                     " randomized geometric tails with binomial noise"));
  }

  // Fast versus naive convolution sampling.
  {
    const std::vector<OffspringLaw> laws = {
        OffspringLaw::poisson(2.0), OffspringLaw::geometric_shifted(0.5),
        OffspringLaw::finite({{0, 0.25}, {2, 0.75}}), OffspringLaw::power_tail(2.5, 1000)};
    const SamplerEquivalence s =
        sampler_equivalence(laws, cfg.sampler_max_z, cfg.sampler_draws,
                            substream(opts.seed, Stream::kTrajectory), opts.workers);
    nlohmann::json names = nlohmann::json::array();
    for (const auto& l : laws) names.push_back(l.describe());
    rep.details["sampler_equivalence"] = {{"laws", names},
                                          {"trials", s.trials},
                                          {"rejections", s.rejections},
                                          {"allowed_fraction", s.allowed_fraction}};
    rep.add(make("sampler_rejection_fraction",
                 static_cast<double>(s.rejections) / static_cast<double>(s.trials),
                 s.allowed_fraction, "<=",
                 "1% two-sample KS of sample_total vs summed sample_one, z = 1..max_z"));
  }

  // KS machinery: two independent limit samples of the same model.
  {
    const EnvironmentSequence env =
        realize(EnvironmentModel::constant(OffspringLaw::poisson(2.0)), 20, 0);
    const double threshold = stats::ks_threshold(cfg.ks_reps, cfg.ks_reps, 0.01);
    const std::uint64_t base = substream(opts.seed, Stream::kLimitLaw);
    std::size_t passes = 0;
    for (std::size_t i = 0; i < cfg.ks_campaigns; ++i) {
      const LimitEstimate a = limit_law_sample(env, cfg.ks_reps, 20, mix(base, 2 * i), opts.workers);
      const LimitEstimate b =
          limit_law_sample(env, cfg.ks_reps, 20, mix(base, 2 * i + 1), opts.workers);
      if (stats::ks_distance(a.sample, b.sample) <= threshold) ++passes;
    }
    rep.add(make("ks_self_consistency_pass_fraction",
                 static_cast<double>(passes) / static_cast<double>(std::max<std::size_t>(1, cfg.ks_campaigns)),
                 cfg.ks_min_pass_fraction, ">=",
                 "two independent limit samples of constant Poisson(2) pass the 1% KS test"));
  }
  rep.provenance = options_json(opts);
  rep.wall_seconds = clock.seconds();
  return rep;
}

}  // namespace bpre
