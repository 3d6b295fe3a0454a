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

#include "bpre/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace bpre::cli {
namespace {

using json = nlohmann::json;

const char* type_name(const json& j) { return j.type_name(); }

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1] ? 1u : 0u)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Read access to one JSON object that remembers which keys were consumed,
// so that leftovers can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(where() + "expected an object, got " + type_name(j_));
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) {
      // A misspelling is the likelier mistake; name the stray key instead.
      for (const auto& item : j_.items()) {
        if (!seen_.count(item.key()) && edit_distance(item.key(), key) <= 2) {
          throw ConfigError("unknown key \"" + item.key() + "\"" +
                            (path_.empty() ? "" : " in " + path_) + " (did you mean \"" +
                            key + "\"?)");
        }
      }
      throw ConfigError("missing required key \"" + sub(key) + "\"");
    }
    return j_.at(key);
  }

  std::string sub(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(sub(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(sub(key) + ": expected a finite number");
    return d;
  }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }
  std::optional<double> opt_number(const std::string& key) {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }

  std::uint64_t uint(const std::string& key) { return to_uint(raw(key), sub(key)); }
  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    return has(key) ? uint(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(sub(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(sub(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(sub(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(sub(key) + "[" + std::to_string(i) + "]: expected a number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<std::size_t> sizes(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(sub(key) + ": expected an array of integers");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(to_uint(v[i], sub(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  // Rejects keys that were never looked at.
  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown key \"" + item.key() + "\"" +
                          (path_.empty() ? "" : " in " + path_));
      }
    }
  }

  static std::uint64_t to_uint(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
      throw ConfigError(path + ": expected a nonnegative integer");
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d < 18446744073709551616.0 && std::floor(d) == d) {
        return static_cast<std::uint64_t>(d);
      }
    }
    throw ConfigError(path + ": expected a nonnegative integer");
  }

 private:
  std::string where() const { return path_.empty() ? "" : path_ + ": "; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Library validation errors become config errors tagged with the path.
template <typename F>
auto tagged(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<OffspringLaw> parse_laws(Fields& f, const std::string& key) {
  const json& arr = f.raw(key);
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError(f.sub(key) + ": expected a nonempty array of laws");
  }
  std::vector<OffspringLaw> laws;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    laws.push_back(parse_law(arr[i], f.sub(key) + "[" + std::to_string(i) + "]"));
  }
  return laws;
}

std::vector<double> parse_distribution(Fields& f, const std::string& key) {
  return f.numbers(key);
}

RateTarget parse_target(const json& j, const std::string& path,
                        const std::optional<EnvironmentModel>& model) {
  Fields f(j, path);
  const std::string kind = f.string("kind");
  RateTarget t;
  if (kind == "exponential") {
    const double p = f.number("p", 2.0);
    double a = 0.0;
    if (f.has("a")) {
      a = f.number("a");
    } else {
      if (!model) throw ConfigError(f.sub("a") + ": required without a model");
      a = model->log_growth_rate();
    }
    t = tagged(path, [&] { return RateTarget::exponential(a, p); });
  } else if (kind == "polynomial") {
    const double alpha = f.number("alpha", 1.0);
    t = tagged(path, [&] { return RateTarget::polynomial(alpha); });
  } else {
    throw ConfigError(f.sub("kind") + ": expected \"exponential\" or \"polynomial\", got \"" +
                      kind + "\"");
  }
  f.finish();
  return t;
}

std::vector<std::size_t> parse_n_range(Fields& f) {
  if (f.has("n_list")) {
    if (f.has("n_min") || f.has("n_max")) {
      throw ConfigError(f.sub("n_list") + ": give either n_list or n_min/n_max");
    }
    return f.sizes("n_list");
  }
  const std::size_t lo = f.uint("n_min");
  const std::size_t hi = f.uint("n_max");
  if (hi < lo) throw ConfigError(f.sub("n_max") + ": must be >= n_min");
  std::vector<std::size_t> out;
  for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

SamplingMode parse_mode(const std::string& s, const std::string& path) {
  if (s == "quenched") return SamplingMode::kQuenched;
  if (s == "annealed") return SamplingMode::kAnnealed;
  throw ConfigError(path + ": expected \"quenched\" or \"annealed\", got \"" + s + "\"");
}

CampaignParams parse_params(const std::string& kind, const json& j, const std::string& path,
                            const std::optional<EnvironmentModel>& model) {
  Fields f(j, path);
  CampaignParams out;
  if (kind == "simulate") {
    SimulateParams p;
    p.n = f.uint("n");
    p.reps = f.uint("reps", 1);
    p.mean_sigma = f.number("mean_sigma", p.mean_sigma);
    p.variance_rel_tol = f.number("variance_rel_tol", p.variance_rel_tol);
    if (p.reps < 1) throw ConfigError(f.sub("reps") + ": must be >= 1");
    out = p;
  } else if (kind == "rate") {
    RateConfig c;
    c.n_list = parse_n_range(f);
    c.reps = f.uint("reps");
    c.target = parse_target(f.raw("target"), f.sub("target"), model);
    c.statistic = tagged(f.sub("statistic"), [&] {
      return rate_statistic_from_string(f.string("statistic", "mean_abs"));
    });
    c.tolerance = f.number("tolerance", c.tolerance);
    c.two_sided = f.boolean("two_sided", c.two_sided);
    c.series_paths = f.uint("series_paths", c.series_paths);
    c.series_horizon = f.uint("series_horizon", c.series_horizon);
    out = c;
  } else if (kind == "clt") {
    CltConfig c;
    c.n_list = f.sizes("n_list");
    c.reps = f.uint("reps");
    c.mode = parse_mode(f.string("mode", "annealed"), f.sub("mode"));
    c.env_reps = f.uint("env_reps", c.env_reps);
    c.repeats = f.uint("repeats", c.repeats);
    c.min_pass_fraction = f.number("min_pass_fraction", c.min_pass_fraction);
    c.alpha = f.number("alpha", c.alpha);
    c.final_ks_max = f.opt_number("final_ks_max");
    c.limit_depth = f.uint("limit_depth", 0);
    if (c.mode == SamplingMode::kAnnealed && c.env_reps != 1) {
      throw ConfigError(f.sub("env_reps") + ": only meaningful in quenched mode");
    }
    out = c;
  } else if (kind == "tail") {
    TailConfig c;
    c.n_list = f.sizes("n_list");
    c.eps_list = f.numbers("eps_list");
    c.reps = f.uint("reps");
    c.tolerance = f.number("tolerance", c.tolerance);
    c.lack_of_fit_alpha = f.number("lack_of_fit_alpha", c.lack_of_fit_alpha);
    c.min_count = f.uint("min_count", c.min_count);
    out = c;
  } else if (kind == "mgf") {
    MgfConfig c;
    c.t_grid = f.numbers("t_grid");
    c.n_cap = f.uint("n_cap", c.n_cap);
    if (f.has("expect")) {
      const json& arr = f.raw("expect");
      if (!arr.is_array()) throw ConfigError(f.sub("expect") + ": expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Fields e(arr[i], f.sub("expect") + "[" + std::to_string(i) + "]");
        MgfConfig::Expectation x;
        x.t = e.number("t");
        x.value = e.opt_number("value");
        x.tolerance = e.number("tolerance", x.tolerance);
        if (e.has("divergent")) x.divergent = e.boolean("divergent", false);
        e.finish();
        c.expect.push_back(x);
      }
    }
    c.mc_t = f.opt_number("mc_t");
    c.mc_reps = f.uint("mc_reps", c.mc_reps);
    c.mc_depth = f.uint("mc_depth", c.mc_depth);
    out = c;
  } else if (kind == "delta") {
    DeltaParams p;
    p.n_terms = f.uint("n_terms", p.n_terms);
    p.expected = f.opt_number("expected");
    p.rel_tol = f.number("rel_tol", p.rel_tol);
    if (f.has("shift_n")) p.shift_n = f.sizes("shift_n");
    p.shift_rel_tol = f.number("shift_rel_tol", p.shift_rel_tol);
    out = p;
  } else if (kind == "extinction") {
    ExtinctionParams p;
    p.depth = f.uint("depth", p.depth);
    p.expected = f.opt_number("expected");
    p.tolerance = f.number("tolerance", p.tolerance);
    out = p;
  } else if (kind == "calibration") {
    CalibrationConfig c;
    c.tail_instances = f.uint("tail_instances", c.tail_instances);
    c.tail_reps = f.uint("tail_reps", c.tail_reps);
    c.sampler_draws = f.uint("sampler_draws", c.sampler_draws);
    c.sampler_max_z = f.uint("sampler_max_z", c.sampler_max_z);
    c.ks_campaigns = f.uint("ks_campaigns", c.ks_campaigns);
    c.ks_reps = f.uint("ks_reps", c.ks_reps);
    c.ks_min_pass_fraction = f.number("ks_min_pass_fraction", c.ks_min_pass_fraction);
    out = c;
  } else {
    throw ConfigError("campaign: unknown kind \"" + kind +
                      "\" (expected simulate, rate, clt, tail, mgf, delta, extinction, "
                      "calibration or suite)");
  }
  f.finish();
  return out;
}

// Keys shared by the top level and suite members.
struct Common {
  std::optional<json> model;
  json seeds = json::object();
  std::optional<std::uint64_t> workers;
  std::optional<std::uint64_t> extra_depth;
  std::optional<std::uint64_t> cap;
  std::optional<bool> write_samples;
};

void read_common(Fields& f, Common& c) {
  if (f.has("model")) c.model = f.raw("model");
  if (f.has("seeds")) {
    const json& s = f.raw("seeds");
    Fields sf(s, f.sub("seeds"));
    if (sf.has("env_seed")) c.seeds["env_seed"] = sf.uint("env_seed");
    if (sf.has("traj_seed")) c.seeds["traj_seed"] = sf.uint("traj_seed");
    sf.finish();
  }
  if (f.has("workers")) c.workers = f.uint("workers");
  if (f.has("extra_depth")) c.extra_depth = f.uint("extra_depth");
  if (f.has("cap")) c.cap = f.uint("cap");
  if (f.has("write_samples")) c.write_samples = f.boolean("write_samples", false);
}

Campaign build_campaign(const std::string& name, const std::string& kind,
                        const Common& top, const Common& own, const json& params,
                        const std::string& path) {
  Campaign c;
  c.name = name;
  c.kind = kind;
  const auto& model_json = own.model ? own.model : top.model;
  if (model_json) {
    c.model = parse_model(*model_json, own.model ? path + ".model" : "model", &c.warnings);
  } else if (kind != "calibration") {
    throw ConfigError("missing required key \"" + (path.empty() ? std::string("model")
                                                                 : path + ".model") + "\"");
  }
  json seeds = top.seeds;
  for (const auto& item : own.seeds.items()) seeds[item.key()] = item.value();
  c.options.env_seed = seeds.value("env_seed", std::uint64_t{1});
  c.options.seed = seeds.value("traj_seed", std::uint64_t{2});
  c.options.workers = static_cast<unsigned>(own.workers.value_or(top.workers.value_or(0)));
  c.options.extra_depth = own.extra_depth.value_or(top.extra_depth.value_or(kDefaultExtraDepth));
  c.options.cap = own.cap.value_or(top.cap.value_or(kDefaultPopulationCap));
  if (c.options.extra_depth < 1) throw ConfigError("extra_depth: must be >= 1");
  if (c.options.cap < 1) throw ConfigError("cap: must be >= 1");
  c.write_samples = own.write_samples.value_or(top.write_samples.value_or(false));
  c.params = parse_params(kind, params, path.empty() ? "params" : path + ".params", c.model);
  return c;
}

}  // namespace

OffspringLaw parse_law(const json& j, const std::string& path) {
  Fields f(j, path);
  const std::string family = f.string("family");
  OffspringLaw law = OffspringLaw::poisson(1.0);
  if (family == "poisson") {
    const double lambda = f.number("lambda");
    law = tagged(path, [&] { return OffspringLaw::poisson(lambda); });
  } else if (family == "geometric_shifted") {
    const double s = f.number("s");
    law = tagged(path, [&] { return OffspringLaw::geometric_shifted(s); });
  } else if (family == "finite") {
    const json& pmf = f.raw("pmf");
    if (!pmf.is_array() || pmf.empty()) {
      throw ConfigError(f.sub("pmf") + ": expected a nonempty array of [value, probability]");
    }
    std::vector<std::pair<std::uint64_t, double>> atoms;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      const std::string at = f.sub("pmf") + "[" + std::to_string(i) + "]";
      if (!pmf[i].is_array() || pmf[i].size() != 2 || !pmf[i][1].is_number()) {
        throw ConfigError(at + ": expected [value, probability]");
      }
      atoms.emplace_back(Fields::to_uint(pmf[i][0], at + "[0]"), pmf[i][1].get<double>());
    }
    law = tagged(path, [&] { return OffspringLaw::finite(std::move(atoms)); });
  } else if (family == "power_tail") {
    const double exponent = f.number("exponent");
    const std::uint64_t kmax = f.uint("kmax", 1'000'000);
    law = tagged(path, [&] { return OffspringLaw::power_tail(exponent, kmax); });
  } else {
    throw ConfigError(f.sub("family") + ": unknown family \"" + family +
                      "\" (expected poisson, geometric_shifted, finite or power_tail)");
  }
  f.finish();
  return law;
}

EnvironmentModel parse_model(const json& j, const std::string& path,
                             std::vector<std::string>* warnings) {
  Fields f(j, path);
  const std::string kind = f.string("kind");
  std::optional<EnvironmentModel> model;
  if (kind == "deterministic") {
    auto laws = parse_laws(f, "laws");
    const std::string ext = f.string("extension", "repeat_last");
    Extension e = Extension::kRepeatLast;
    if (ext == "cyclic") {
      e = Extension::kCyclic;
    } else if (ext != "repeat_last") {
      throw ConfigError(f.sub("extension") + ": expected \"repeat_last\" or \"cyclic\"");
    }
    model = tagged(path, [&] { return EnvironmentModel::deterministic(std::move(laws), e); });
  } else if (kind == "iid") {
    auto laws = parse_laws(f, "laws");
    auto probs = parse_distribution(f, "probs");
    model = tagged(path, [&] { return EnvironmentModel::iid(std::move(laws), std::move(probs)); });
  } else if (kind == "markov") {
    auto laws = parse_laws(f, "laws");
    const json& tj = f.raw("transition");
    if (!tj.is_array()) throw ConfigError(f.sub("transition") + ": expected a matrix");
    std::vector<std::vector<double>> transition;
    for (std::size_t i = 0; i < tj.size(); ++i) {
      const std::string at = f.sub("transition") + "[" + std::to_string(i) + "]";
      if (!tj[i].is_array()) throw ConfigError(at + ": expected an array of numbers");
      std::vector<double> row;
      for (const auto& v : tj[i]) {
        if (!v.is_number()) throw ConfigError(at + ": expected an array of numbers");
        row.push_back(v.get<double>());
      }
      transition.push_back(std::move(row));
    }
    model = tagged(path, [&] {
      return EnvironmentModel::markov_stationary(laws, transition);
    });
    if (f.has("initial")) {
      auto initial = parse_distribution(f, "initial");
      const auto pi = model->stationary();
      double gap = 0.0;
      for (std::size_t i = 0; i < std::min(pi.size(), initial.size()); ++i) {
        gap = std::max(gap, std::abs(pi[i] - initial[i]));
      }
      model = tagged(f.sub("initial"), [&] { return model->with_initial(initial); });
      if (gap > 1e-9 && warnings) {
        warnings->push_back(f.sub("initial") +
                            " differs from the stationary distribution; annealed "
                            "statements assume a stationary environment");
      }
    }
  } else {
    throw ConfigError(f.sub("kind") + ": unknown model kind \"" + kind +
                      "\" (expected deterministic, iid or markov)");
  }
  f.finish();
  return *model;
}

void apply_override(json& config, const std::string& dotted_path, const std::string& text) {
  if (dotted_path.empty()) throw ConfigError("empty override path");
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_path.find('.', start);
    const std::string key = dotted_path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ConfigError("override \"" + dotted_path + "\": empty path segment");
    const bool index = std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; });
    json* next = nullptr;
    if (node->is_array() && index) {
      const std::size_t i = std::stoul(key);
      if (i >= node->size()) {
        throw ConfigError("override \"" + dotted_path + "\": index " + key + " out of range");
      }
      next = &(*node)[i];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) {
        throw ConfigError("override \"" + dotted_path + "\": \"" + key +
                          "\" is not inside an object");
      }
      next = &(*node)[key];
    }
    if (dot == std::string::npos) {
      *next = value;
      return;
    }
    node = next;
    start = dot + 1;
  }
}

ExperimentConfig parse_config(const json& config) {
  ExperimentConfig out;
  out.resolved = config;
  Fields f(config, "");
  const std::string kind = f.string("campaign");
  out.output_dir = f.string("output_dir", "bpre-out");
  Common top;
  read_common(f, top);
  if (kind == "suite") {
    out.suite = true;
    const json& members = f.raw("members");
    if (!members.is_array() || members.empty()) {
      throw ConfigError("members: expected a nonempty array of campaigns");
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const std::string path = "members[" + std::to_string(i) + "]";
      Fields m(members[i], path);
      const std::string mk = m.string("campaign");
      if (mk == "suite") throw ConfigError(path + ".campaign: suites cannot nest");
      const std::string name = m.string("name", std::to_string(i) + "-" + mk);
      if (!names.insert(name).second) {
        throw ConfigError(path + ".name: duplicate member name \"" + name + "\"");
      }
      Common own;
      read_common(m, own);
      const json params = m.has("params") ? m.raw("params") : json::object();
      out.campaigns.push_back(build_campaign(name, mk, top, own, params, path));
      m.finish();
    }
    if (f.has("params")) throw ConfigError("params: a suite takes params per member");
  } else {
    const json params = f.has("params") ? f.raw("params") : json::object();
    out.campaigns.push_back(build_campaign(kind, kind, top, Common{}, params, ""));
  }
  f.finish();
  return out;
}

}  // namespace bpre::cli
