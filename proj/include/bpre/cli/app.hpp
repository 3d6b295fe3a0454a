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

#include <iosfwd>
#include <string>

#include "bpre/cli/config.hpp"
#include "bpre/verify.hpp"

namespace bpre::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitChecksFailed = 2;

// Report plus the optional raw CSV artifacts of one campaign.
struct CampaignOutcome {
  VerificationReport report;
  std::string trajectory_csv;  // "k,Z,logP,W", simulate with reps = 1
  std::string samples_csv;     // "rep,Wn,dW", simulate with reps > 1
};

// Runs one validated campaign. Library errors propagate.
CampaignOutcome run_campaign(const Campaign& campaign);

// Entry point of the `bpre` executable; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bpre::cli
