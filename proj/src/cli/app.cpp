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

#include "bpre/cli/app.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bpre/cli/presets.hpp"
#include "bpre/engine.hpp"
#include "bpre/limits.hpp"
#include "bpre/rng.hpp"
#include "bpre/stats.hpp"

namespace bpre::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Criterion check(std::string name, double value, double threshold, const std::string& cmp) {
  bool pass = false;
  if (cmp == "<=") pass = value <= threshold;
  if (cmp == ">=") pass = value >= threshold;
  return {std::move(name), value, threshold, cmp, pass, ""};
}

json options_json(const CampaignOptions& o) {
  return {{"env_seed", o.env_seed},
          {"seed", o.seed},
          {"workers", o.workers},
          {"cap", o.cap},
          {"extra_depth", o.extra_depth}};
}

CampaignOutcome run_simulate(const EnvironmentModel& model, const SimulateParams& p,
                             const CampaignOptions& o) {
  CampaignOutcome out;
  VerificationReport& rep = out.report;
  rep.campaign = "simulate";
  rep.provenance = options_json(o);
  rep.config = {{"model", model.describe()},
                {"n", p.n},
                {"reps", p.reps},
                {"mean_sigma", p.mean_sigma},
                {"variance_rel_tol", p.variance_rel_tol}};
  const std::uint64_t traj_base = substream(o.seed, Stream::kTrajectory);

  if (p.reps == 1) {
    const EnvironmentSequence env = realize(model, p.n, o.env_seed);
    const Trajectory t = simulate(env, p.n, mix(traj_base, 0), o.cap);
    rep.columns = {"k", "Z", "logP", "W"};
    out.trajectory_csv = "k,Z,logP,W\n";
    for (std::size_t k = 0; k < t.z.size(); ++k) {
      rep.rows.push_back({static_cast<double>(k), static_cast<double>(t.z[k]), t.log_p[k],
                          t.w[k]});
      out.trajectory_csv += std::to_string(k) + "," + std::to_string(t.z[k]) + "," +
                            g17(t.log_p[k]) + "," + g17(t.w[k]) + "\n";
    }
    if (t.capped) {
      rep.notes.push_back("population cap reached; path stops at generation " +
                          std::to_string(t.generations()));
    }
    rep.details["capped"] = t.capped;
    return out;
  }

  const std::size_t depth = p.n + o.extra_depth;
  const EnvironmentSequence env = realize(model, depth, o.env_seed);
  const double tail_n = delta2_tail(env, p.n);
  const double tail_depth = delta2_tail(env, depth);
  // Var(W_{n+K} - W_n) exactly; the residual beyond n+K is not part of it.
  const double analytic = tail_n - tail_depth;
  if (tail_n > 0.0) {
    const double residual = std::sqrt(tail_depth / tail_n);
    rep.details["residual_fraction"] = residual;
    if (residual > kMaxResidualFraction) {
      throw EstimatorInvalid("simulate: estimator residual sd is " + g17(residual) +
                             " of the fluctuation scale (limit " +
                             g17(kMaxResidualFraction) + "); increase extra_depth");
    }
  }

  const auto pairs = sample_fluctuation(env, p.n, o.extra_depth, p.reps, traj_base, o.workers);
  std::vector<double> dw(pairs.size());
  std::ostringstream csv;
  csv << "rep,Wn,dW\n";
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    dw[r] = pairs[r].dw;
    csv << r << ',' << g17(pairs[r].w_n) << ',' << g17(pairs[r].dw) << '\n';
  }
  out.samples_csv = csv.str();
  const stats::Moments m = stats::moments(dw);

  rep.columns = {"n", "reps", "mean_dw", "se_dw", "var_dw", "analytic_var"};
  rep.rows.push_back({static_cast<double>(p.n), static_cast<double>(p.reps), m.mean,
                      m.std_error, m.variance, analytic});
  rep.details["analytic_variance_limit"] = tail_n;
  if (analytic == 0.0) {
    double worst = 0.0;
    for (double v : dw) worst = std::max(worst, std::abs(v));
    rep.add(check("all_fluctuations_zero", worst, 0.0, "<="));
    rep.notes.push_back("every law from generation " + std::to_string(p.n) +
                        " on is a point mass");
    return out;
  }
  const double z = m.std_error > 0.0 ? std::abs(m.mean) / m.std_error : 0.0;
  rep.add(check("mean_within_sigma", z, p.mean_sigma, "<="));
  rep.add(check("variance_rel_error", std::abs(m.variance / analytic - 1.0),
                p.variance_rel_tol, "<="));
  return out;
}

VerificationReport run_delta(const EnvironmentModel& model, const DeltaParams& p,
                             const CampaignOptions& o) {
  VerificationReport rep;
  rep.campaign = "delta";
  rep.provenance = options_json(o);
  json expected = p.expected ? json(*p.expected) : json(nullptr);
  rep.config = {{"model", model.describe()},  {"n_terms", p.n_terms},
                {"expected", expected},        {"rel_tol", p.rel_tol},
                {"shift_n", p.shift_n},        {"shift_rel_tol", p.shift_rel_tol}};
  std::size_t horizon = 64;
  for (std::size_t n : p.shift_n) horizon = std::max(horizon, n + 1);
  const EnvironmentSequence env = realize(model, horizon, o.env_seed);
  const VarianceSeries s = delta2_partial(env, p.n_terms);
  const LimitEstimate est{.kind = LimitKind::kDelta2,
                          .value = s.limit(),
                          .sample = {},
                          .std_error = std::nullopt,
                          .meta = {{"converged", s.converged()},
                                   {"truncation_index", s.truncation_index()},
                                   {"degenerate", s.degenerate()},
                                   {"divergence_suspected", s.divergence_suspected()}}};
  rep.details["estimate"] = est.to_json();
  rep.details["value"] = est.value;
  rep.columns = {"k", "partial_sum"};
  for (std::size_t k = 0; k < s.partials().size(); ++k) {
    rep.rows.push_back({static_cast<double>(k), s.partials()[k]});
  }
  if (!s.converged()) rep.notes.push_back("series did not converge within n_terms");
  rep.add(check("converged", s.converged() ? 1.0 : 0.0, 1.0, ">="));
  if (p.expected) {
    const double scale = std::max(std::abs(*p.expected), 1e-300);
    rep.add(check("value_rel_error", std::abs(est.value - *p.expected) / scale, p.rel_tol,
                  "<="));
  }
  // delta^2(T^n xi) by two routes: the shifted series, and the tail of the
  // unshifted one rescaled by P_n.
  for (std::size_t n : p.shift_n) {
    const double tail = s.tail_from(n) * std::exp(log_Pn(env.extended(n + 1), n));
    const double d = delta2_shifted(env, n);
    const double shifted = d * d;
    rep.details["shift"][std::to_string(n)] = {{"shifted_series", shifted},
                                               {"rescaled_tail", tail}};
    rep.add(check("shift_consistency_n" + std::to_string(n),
                  std::abs(shifted - tail) / std::max(std::abs(shifted), 1e-300),
                  p.shift_rel_tol, "<="));
  }
  return rep;
}

VerificationReport run_extinction(const EnvironmentModel& model, const ExtinctionParams& p,
                                  const CampaignOptions& o) {
  VerificationReport rep;
  rep.campaign = "extinction";
  rep.provenance = options_json(o);
  json expected = p.expected ? json(*p.expected) : json(nullptr);
  rep.config = {{"model", model.describe()},
                {"depth", p.depth},
                {"expected", expected},
                {"tolerance", p.tolerance}};
  const EnvironmentSequence env = realize(model, p.depth, o.env_seed);
  const ExtinctionEstimate e = extinction_prob(env, p.depth);
  rep.details["value"] = e.value;
  rep.details["last_increment"] = e.last_increment;
  rep.columns = {"depth", "q", "last_increment"};
  rep.rows.push_back({static_cast<double>(p.depth), e.value, e.last_increment});
  if (p.expected) {
    rep.add(check("value_abs_error", std::abs(e.value - *p.expected), p.tolerance, "<="));
  }
  return rep;
}

}  // namespace

CampaignOutcome run_campaign(const Campaign& c) {
  const auto t0 = std::chrono::steady_clock::now();
  CampaignOutcome out;
  const CampaignOptions& o = c.options;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SimulateParams>) {
          out = run_simulate(*c.model, p, o);
        } else if constexpr (std::is_same_v<P, RateConfig>) {
          out.report = check_rate(*c.model, p, o);
        } else if constexpr (std::is_same_v<P, CltConfig>) {
          out.report = check_clt(*c.model, p, o);
        } else if constexpr (std::is_same_v<P, TailConfig>) {
          out.report = check_tail(*c.model, p, o);
        } else if constexpr (std::is_same_v<P, MgfConfig>) {
          out.report = check_exp_moment(*c.model, p, o);
        } else if constexpr (std::is_same_v<P, DeltaParams>) {
          out.report = run_delta(*c.model, p, o);
        } else if constexpr (std::is_same_v<P, ExtinctionParams>) {
          out.report = run_extinction(*c.model, p, o);
        } else {
          out.report = run_calibration(p, o);
        }
      },
      c.params);
  for (const auto& w : c.warnings) out.report.notes.push_back("warning: " + w);
  out.report.wall_seconds = seconds_since(t0);
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed: " + path.string());
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
}

// Sets a seed at the top level and in every member that carries its own.
void set_seed(json& config, const std::string& key, std::uint64_t value) {
  if (!config.is_object()) return;
  config["seeds"][key] = value;
  if (config.contains("members") && config["members"].is_array()) {
    for (auto& m : config["members"]) {
      if (m.is_object() && m.contains("seeds") && m["seeds"].is_object()) {
        m["seeds"][key] = value;
      }
    }
  }
}

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 10);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a nonnegative integer, got \"" + text + "\"");
  }
}

// "--a.b=v" and "--a.b v" tokens left over by the flag parser.
std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() < 3) {
      throw ConfigError("unexpected argument \"" + tok + "\"");
    }
    const std::string body = tok.substr(2);
    const std::size_t eq = body.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      out.emplace_back(body, extras[++i]);
    } else {
      throw ConfigError("override --" + body + " has no value");
    }
  }
  return out;
}

struct RunFlags {
  std::string config_path;
  std::string preset;
  std::optional<unsigned> workers;
  std::optional<std::string> output;
  std::optional<std::string> seed;
  std::optional<std::string> env_seed;
  bool write_samples = false;
  std::vector<std::string> extras;
};

// Config file or preset, then BPRE_SEED, then --dot.path overrides, then
// the named flags.
json resolve_config(const RunFlags& f) {
  if (f.config_path.empty() == f.preset.empty()) {
    throw ConfigError("give exactly one of a config file or --preset NAME");
  }
  json config = f.preset.empty() ? read_json_file(f.config_path) : preset_config(f.preset);
  if (!config.is_object()) throw ConfigError("config: expected a JSON object");
  if (const char* env = std::getenv("BPRE_SEED"); env && *env) {
    const std::uint64_t s = parse_seed(env, "BPRE_SEED");
    set_seed(config, "env_seed", s);
    set_seed(config, "traj_seed", s);
  }
  for (const auto& [path, value] : parse_overrides(f.extras)) {
    apply_override(config, path, value);
  }
  if (f.workers) config["workers"] = *f.workers;
  if (f.output) config["output_dir"] = *f.output;
  if (f.write_samples) config["write_samples"] = true;
  if (f.seed) set_seed(config, "traj_seed", parse_seed(*f.seed, "--seed"));
  if (f.env_seed) set_seed(config, "env_seed", parse_seed(*f.env_seed, "--env-seed"));
  return config;
}

void print_report(std::ostream& out, const std::string& label, const VerificationReport& r) {
  out << "[" << label << "] " << r.campaign;
  if (r.config.contains("model")) out << "  model: " << r.config["model"].get<std::string>();
  out << "\n";
  for (const auto& c : r.criteria) {
    char line[256];
    std::snprintf(line, sizeof line, "  %s %-34s %.6g %s %.6g", c.pass ? "PASS" : "FAIL",
                  c.name.c_str(), c.value, c.comparator.c_str(), c.threshold);
    out << line;
    if (!c.note.empty()) out << "  (" << c.note << ")";
    out << "\n";
  }
  if (r.degenerate) out << "  DEGENERATE\n";
  for (const auto& n : r.notes) out << "  note: " << n << "\n";
  if (r.criteria.empty() && !r.degenerate) out << "  (no checks; data written)\n";
}

void write_outcome(const fs::path& dir, const CampaignOutcome& o, const json& resolved,
                   const std::string& member, bool write_samples) {
  fs::create_directories(dir);
  json j = o.report.to_json();
  j["resolved_config"] = resolved;
  if (!member.empty()) j["suite_member"] = member;
  write_file(dir / "report.json", j.dump(2) + "\n");
  write_file(dir / "stats.csv", o.report.stats_csv());
  if (!o.trajectory_csv.empty()) write_file(dir / "trajectory.csv", o.trajectory_csv);
  if (write_samples && !o.samples_csv.empty()) {
    write_file(dir / "samples.csv", o.samples_csv);
  }
}

int do_run(const RunFlags& flags, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const json resolved = resolve_config(flags);
  const ExperimentConfig cfg = parse_config(resolved);
  const fs::path root(cfg.output_dir);
  bool all_pass = true;
  std::size_t checks = 0;
  std::size_t failed = 0;
  json members = json::array();
  for (const auto& c : cfg.campaigns) {
    const CampaignOutcome o = run_campaign(c);
    const fs::path dir = cfg.suite ? root / c.name : root;
    write_outcome(dir, o, resolved, cfg.suite ? c.name : "", c.write_samples);
    print_report(out, c.name, o.report);
    all_pass = all_pass && o.report.passed();
    for (const auto& cr : o.report.criteria) {
      ++checks;
      if (!cr.pass) ++failed;
    }
    members.push_back({{"name", c.name},
                       {"campaign", c.kind},
                       {"passed", o.report.passed()},
                       {"directory", c.name},
                       {"wall_seconds", o.report.wall_seconds}});
  }
  if (cfg.suite) {
    json summary = {{"schema_version", kReportSchemaVersion},
                    {"campaign", "suite"},
                    {"passed", all_pass},
                    {"members", members},
                    {"resolved_config", resolved},
                    {"wall_seconds", seconds_since(t0)}};
    write_file(root / "report.json", summary.dump(2) + "\n");
  }
  char line[160];
  std::snprintf(line, sizeof line, "result: %s  (%zu of %zu checks failed)  %.1f s  -> %s\n",
                all_pass ? "PASS" : "FAIL", failed, checks, seconds_since(t0),
                (root / "report.json").string().c_str());
  out << line;
  return all_pass ? kExitPass : kExitChecksFailed;
}

int do_validate(const RunFlags& flags, std::ostream& out) {
  const json resolved = resolve_config(flags);
  const ExperimentConfig cfg = parse_config(resolved);
  for (const auto& c : cfg.campaigns) {
    out << "ok: " << c.name << " (" << c.kind << ")";
    if (c.model) out << "  model: " << c.model->describe();
    out << "\n";
    for (const auto& w : c.warnings) out << "  warning: " << w << "\n";
  }
  return kExitPass;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verification campaigns for branching processes in random environments",
               "bpre"};
  app.require_subcommand(1);

  RunFlags flags;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("config", flags.config_path, "JSON experiment config");
    sub->add_option("--preset", flags.preset, "Bundled config name (see `bpre presets`)");
    sub->add_option("--workers", flags.workers, "Worker threads (default: logical CPUs)");
    sub->add_option("--output", flags.output, "Output directory");
    sub->add_option("--seed", flags.seed, "Trajectory seed");
    sub->add_option("--env-seed", flags.env_seed, "Environment seed");
    sub->add_flag("--write-samples", flags.write_samples, "Write samples.csv");
    sub->allow_extras();
    sub->footer("Any config leaf can be overridden with --dot.path=value, e.g. --params.reps=1000.");
  };
  CLI::App* run = app.add_subcommand("run", "Run a campaign and write its artifacts");
  add_run_flags(run);
  CLI::App* validate = app.add_subcommand("validate", "Check a config without running it");
  add_run_flags(validate);
  std::string show;
  CLI::App* list = app.add_subcommand("presets", "List bundled preset configs");
  list->add_option("--show", show, "Print one preset's JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitPass : kExitError;
  }

  try {
    if (list->parsed()) {
      if (show.empty()) {
        out << list_presets();
      } else {
        out << preset_config(show).dump(2) << "\n";
      }
      return kExitPass;
    }
    CLI::App* sub = run->parsed() ? run : validate;
    flags.extras = sub->remaining();
    return run->parsed() ? do_run(flags, out) : do_validate(flags, out);
  } catch (const HypothesisError& e) {
    err << "bpre: hypothesis not satisfied: " << e.what() << "\n";
  } catch (const ConfigError& e) {
    err << "bpre: invalid config: " << e.what() << "\n";
  } catch (const EstimatorInvalid& e) {
    err << "bpre: estimator invalid: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "bpre: error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace bpre::cli
