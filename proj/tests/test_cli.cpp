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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bpre/cli/app.hpp"
#include "bpre/cli/config.hpp"
#include "bpre/cli/presets.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "bpre");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = bpre::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bpre-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

json delta_config(const fs::path& out) {
  return {{"campaign", "delta"},
          {"model", {{"kind", "deterministic"}, {"laws", {{{"family", "poisson"}, {"lambda", 2}}}}}},
          {"output_dir", out.string()},
          {"params", {{"expected", 1.0}}}};
}

}  // namespace

TEST_CASE("unknown key is rejected and named") {
  const auto dir = scratch("lamda");
  json j = delta_config(dir / "out");
  j["model"]["laws"][0] = {{"family", "poisson"}, {"lamda", 2}};
  const auto r = run({"run", write_config(dir, j).string()});
  CHECK(r.code == bpre::cli::kExitError);
  CHECK(r.err.find("lamda") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("unknown top-level and params keys are rejected") {
  const auto dir = scratch("unknown");
  json j = delta_config(dir / "out");
  j["extra"] = 1;
  CHECK_THROWS_WITH_AS(bpre::cli::parse_config(j), doctest::Contains("extra"),
                       bpre::cli::ConfigError);
  j.erase("extra");
  j["params"]["rel_tl"] = 1;
  CHECK_THROWS_WITH_AS(bpre::cli::parse_config(j), doctest::Contains("rel_tl"),
                       bpre::cli::ConfigError);
}

TEST_CASE("delta campaign on constant Poisson(2) reports 1") {
  const auto dir = scratch("delta");
  const auto r = run({"run", write_config(dir, delta_config(dir / "out")).string()});
  CHECK(r.code == bpre::cli::kExitPass);
  const json rep = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(std::abs(rep["details"]["value"].get<double>() - 1.0) <= 1e-9);
  CHECK(rep["resolved_config"]["campaign"] == "delta");
  CHECK(fs::exists(dir / "out" / "stats.csv"));
}

TEST_CASE("simulate with unit reproduction writes a flat trajectory") {
  const auto dir = scratch("unit");
  json j = {{"campaign", "simulate"},
            {"model", {{"kind", "deterministic"}, {"laws", {{{"family", "finite"}, {"pmf", {{1, 1.0}}}}}}}},
            {"output_dir", (dir / "out").string()},
            {"params", {{"n", 5}}}};
  const auto r = run({"run", write_config(dir, j).string()});
  CHECK(r.code == bpre::cli::kExitPass);
  CHECK(slurp(dir / "out" / "trajectory.csv") ==
        "k,Z,logP,W\n0,1,0,1\n1,1,0,1\n2,1,0,1\n3,1,0,1\n4,1,0,1\n5,1,0,1\n");
}

TEST_CASE("flag overrides are applied and echoed") {
  const auto dir = scratch("override");
  const auto cfg = write_config(dir, delta_config(dir / "ignored"));
  const auto r = run({"run", cfg.string(), "--output", (dir / "out").string(),
                      "--params.rel_tol=1e-20", "--env-seed", "9"});
  // 1e-20 is below double precision of the sum: the check fails.
  CHECK(r.code == bpre::cli::kExitChecksFailed);
  const json rep = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(rep["resolved_config"]["params"]["rel_tol"] == 1e-20);
  CHECK(rep["resolved_config"]["seeds"]["env_seed"] == 9);
  CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("seed precedence: flags over BPRE_SEED over config") {
  const auto dir = scratch("seeds");
  json j = delta_config(dir / "out");
  j["seeds"] = {{"env_seed", 5}, {"traj_seed", 6}};
  const auto cfg = write_config(dir, j);
  ::setenv("BPRE_SEED", "77", 1);
  run({"run", cfg.string()});
  json rep = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(rep["resolved_config"]["seeds"]["env_seed"] == 77);
  CHECK(rep["resolved_config"]["seeds"]["traj_seed"] == 77);
  run({"run", cfg.string(), "--seed", "3"});
  rep = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(rep["resolved_config"]["seeds"]["env_seed"] == 77);
  CHECK(rep["resolved_config"]["seeds"]["traj_seed"] == 3);
  ::unsetenv("BPRE_SEED");
  run({"run", cfg.string()});
  rep = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(rep["resolved_config"]["seeds"]["env_seed"] == 5);
}

TEST_CASE("presets list is stable and contains every experiment") {
  const auto a = run({"presets"});
  const auto b = run({"presets"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  for (const char* name : {"heyde-gw-clt", "finite-state-tail", "delta-closed-form",
                           "martingale-variance", "iid-env-clt", "exp-rate-l2",
                           "poly-rate-power-tail", "exp-moment-geometric", "calibration"}) {
    CHECK(a.out.find(name) != std::string::npos);
  }
}

TEST_CASE("every preset validates") {
  for (const auto& p : bpre::cli::presets()) {
    CAPTURE(p.name);
    const auto cfg = bpre::cli::parse_config(bpre::cli::preset_config(p.name));
    CHECK_FALSE(cfg.campaigns.empty());
    CHECK(run({"validate", "--preset", p.name}).code == 0);
  }
  CHECK(run({"presets", "--show", "heyde-gw-clt"}).out.find("\"clt\"") != std::string::npos);
  CHECK(run({"run", "--preset", "no-such-preset"}).code == bpre::cli::kExitError);
}

TEST_CASE("hypothesis violations exit 1 with the hypothesis quoted") {
  const auto dir = scratch("hyp");
  json j = {{"campaign", "tail"},
            {"model", {{"kind", "deterministic"}, {"laws", {{{"family", "poisson"}, {"lambda", 2}}}}}},
            {"output_dir", (dir / "out").string()},
            {"params", {{"n_list", {2, 3}}, {"eps_list", {0.1}}, {"reps", 1000}}}};
  const auto r = run({"run", write_config(dir, j).string()});
  CHECK(r.code == bpre::cli::kExitError);
  CHECK(r.err.find("p_0(xi_0) = 0") != std::string::npos);
}

TEST_CASE("markov initial distribution other than stationary warns") {
  std::vector<std::string> warnings;
  const json m = {{"kind", "markov"},
                  {"laws", {{{"family", "poisson"}, {"lambda", 2}}, {{"family", "poisson"}, {"lambda", 3}}}},
                  {"transition", {{0.9, 0.1}, {0.2, 0.8}}},
                  {"initial", {1.0, 0.0}}};
  const auto model = bpre::cli::parse_model(m, "model", &warnings);
  CHECK(warnings.size() == 1);
  CHECK(model.initial()[0] == 1.0);
  json s = m;
  s.erase("initial");
  warnings.clear();
  const auto stat = bpre::cli::parse_model(s, "model", &warnings);
  CHECK(warnings.empty());
  CHECK(stat.initial()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("apply_override") {
  json j = {{"model", {{"laws", {{{"lambda", 2}}}}}}};
  bpre::cli::apply_override(j, "model.laws.0.lambda", "3.5");
  CHECK(j["model"]["laws"][0]["lambda"] == 3.5);
  bpre::cli::apply_override(j, "params.statistic", "median_abs");
  CHECK(j["params"]["statistic"] == "median_abs");
  bpre::cli::apply_override(j, "params.n_list", "[1,2]");
  CHECK(j["params"]["n_list"].size() == 2);
  CHECK_THROWS_AS(bpre::cli::apply_override(j, "model.laws.4.lambda", "1"),
                  bpre::cli::ConfigError);
}

TEST_CASE("suite writes one directory per member") {
  const auto dir = scratch("suite");
  const auto r = run({"run", "--preset", "delta-closed-form", "--output", (dir / "out").string()});
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "poisson" / "report.json"));
  CHECK(fs::exists(dir / "out" / "geometric" / "report.json"));
  const json top = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(top["passed"] == true);
  CHECK(top["members"].size() == 2);
}

TEST_CASE("simulate writes samples on request") {
  const auto dir = scratch("samples");
  const auto r = run({"run", "--preset", "martingale-variance", "--output", (dir / "out").string(),
                      "--params.reps=2000", "--params.variance_rel_tol=0.5", "--write-samples", "--workers", "2"});
  CHECK(r.code == 0);
  const std::string s = slurp(dir / "out" / "samples.csv");
  CHECK(s.rfind("rep,Wn,dW\n0,", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 2001);
}
