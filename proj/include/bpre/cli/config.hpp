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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bpre/environment.hpp"
#include "bpre/error.hpp"
#include "bpre/verify.hpp"
#include "json.hpp"

namespace bpre::cli {

// Invalid configuration; the message names the offending key path.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct SimulateParams {
  std::size_t n = 0;
  std::size_t reps = 1;
  // Checks for reps > 1: mean of W_hat - W_n within mean_sigma standard
  // errors of 0, variance within variance_rel_tol of the analytic value.
  double mean_sigma = 3.0;
  double variance_rel_tol = 0.05;
};

struct DeltaParams {
  std::size_t n_terms = kMaxSeriesTerms;
  std::optional<double> expected;
  double rel_tol = 1e-9;
  // Shifts at which delta_inf(T^n xi) is computed by both routes.
  std::vector<std::size_t> shift_n;
  double shift_rel_tol = 1e-10;
};

struct ExtinctionParams {
  std::size_t depth = 200;
  std::optional<double> expected;
  double tolerance = 1e-10;
};

using CampaignParams =
    std::variant<SimulateParams, RateConfig, CltConfig, TailConfig, MgfConfig,
                 DeltaParams, ExtinctionParams, CalibrationConfig>;

// One validated campaign.
struct Campaign {
  std::string name;
  std::string kind;
  std::optional<EnvironmentModel> model;
  CampaignOptions options;
  CampaignParams params;
  bool write_samples = false;
  std::vector<std::string> warnings;
};

// A validated configuration: one campaign, or several for kind "suite".
struct ExperimentConfig {
  nlohmann::json resolved;
  std::string output_dir;
  std::vector<Campaign> campaigns;
  bool suite = false;
};

// Sets the value at a dotted path ("params.reps", "model.laws.0.lambda").
// The text is parsed as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& config, const std::string& dotted_path,
                    const std::string& text);

// Validates everything before any computation. Unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& config);

OffspringLaw parse_law(const nlohmann::json& j, const std::string& path);
EnvironmentModel parse_model(const nlohmann::json& j, const std::string& path,
                             std::vector<std::string>* warnings = nullptr);

}  // namespace bpre::cli
