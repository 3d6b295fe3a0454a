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

// Runs every acceptance experiment from its bundled preset and prints one
// PASS/FAIL line per criterion. Exit status 0 only when all pass.

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "bpre/cli/app.hpp"
#include "bpre/cli/config.hpp"
#include "bpre/cli/presets.hpp"

namespace {

struct Item {
  int id;
  const char* preset;
  const char* title;
  // Hard runtime bound in seconds; 0 when none is stated.
  double max_seconds;
};

constexpr Item kItems[] = {
    {1, "delta-closed-form", "closed-form variance series", 1.0},
    {2, "martingale-variance", "martingale mean and variance law", 60.0},
    {3, "heyde-gw-clt", "Galton-Watson limit reproduction", 0.0},
    {4, "iid-env-clt", "random-environment CLT trend", 0.0},
    {5, "exp-rate-l2", "exponential rate in L2", 0.0},
    {6, "poly-rate-power-tail", "polynomial rate (heuristic)", 0.0},
    {7, "finite-state-tail", "supergeometric small-value tails", 0.0},
    {8, "exp-moment-geometric", "exponential moment", 0.0},
    {9, "calibration", "mechanism calibration", 60.0},
};

}  // namespace

int main() {
  bool all = true;
  for (const auto& item : kItems) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    try {
      const auto cfg = bpre::cli::parse_config(bpre::cli::preset_config(item.preset));
      for (const auto& c : cfg.campaigns) {
        const auto out = bpre::cli::run_campaign(c);
        for (const auto& cr : out.report.criteria) {
          std::printf("    %s %s/%s: %.6g %s %.6g\n", cr.pass ? "ok  " : "FAIL", c.name.c_str(),
                      cr.name.c_str(), cr.value, cr.comparator.c_str(), cr.threshold);
        }
        if (!out.report.passed()) {
          pass = false;
          detail += " " + c.name + " failed;";
        }
      }
    } catch (const std::exception& e) {
      pass = false;
      detail += std::string(" error: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (item.max_seconds > 0.0 && secs > item.max_seconds) {
      pass = false;
      detail += " runtime over " + std::to_string(item.max_seconds) + " s;";
    }
    std::printf("%s criterion %d (%s, preset %s) %.1f s%s\n", pass ? "PASS" : "FAIL", item.id,
                item.title, item.preset, secs, detail.c_str());
    std::fflush(stdout);
    all = all && pass;
  }
  std::printf("%s\n", all ? "all criteria passed" : "some criteria failed");
  return all ? 0 : 1;
}
