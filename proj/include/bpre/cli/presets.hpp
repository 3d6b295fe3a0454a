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

#include <span>
#include <string>

#include "json.hpp"

namespace bpre::cli {

struct Preset {
  const char* name;
  const char* summary;
  const char* config;  // JSON text
};

// Bundled configurations, one per acceptance experiment, in a fixed order.
std::span<const Preset> presets();

// Throws ConfigError for an unknown name.
nlohmann::json preset_config(const std::string& name);

// One line per preset: name, then summary.
std::string list_presets();

}  // namespace bpre::cli
