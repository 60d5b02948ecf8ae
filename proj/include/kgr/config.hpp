// Copyright 2026 The kgreason Authors
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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "kgr/orchestrator.hpp"
#include "kgr/preference.hpp"

namespace kgr {

/// Flat view of a TOML-subset document: "section.key" -> scalar.
/// Supported: [section] headers, `key = value` with double-quoted strings,
/// integers, floats and true/false, and `#` comments.
using ConfigValue = std::variant<std::string, std::int64_t, double, bool>;
using ConfigTable = std::map<std::string, ConfigValue, std::less<>>;

ConfigTable parse_config_table(std::istream& in);

enum class BackendKind { kScripted, kHttp };

struct BackendConfig {
  BackendKind kind = BackendKind::kScripted;
  std::filesystem::path rules;  // scripted
  std::string endpoint;         // http base URL
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "KGR_API_KEY";
  int max_retries = 3;
  int timeout_seconds = 120;
};

enum class PlannerKind { kEnumerate, kHttp };

struct PlannerConfig {
  PlannerKind kind = PlannerKind::kEnumerate;
  std::string endpoint;
  std::string model;
  std::string api_key_env = "KGR_PLANNER_API_KEY";
};

struct RunConfig {
  std::filesystem::path graph;
  std::filesystem::path dataset;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  int k = 3;  // hop bound for weak-supervision paths
  bool inverse_edges = false;
  ReasonerConfig reasoner;
  BackendConfig backend;
  PlannerConfig planner;
  KtoConfig kto;

  /// Relative paths resolve against `base_dir`. Throws ConfigError on
  /// unknown keys, wrong value types or invalid values.
  static RunConfig from_table(const ConfigTable& table, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  /// Checks ranges and that input files exist. Throws ConfigError.
  void validate() const;

  /// Echo for manifests. Holds env-var names, never credential values.
  nlohmann::ordered_json to_json() const;
};

/// Reads the credential named by `env_var`. Throws ConfigError when unset.
std::string credential_from_env(const std::string& env_var);

}  // namespace kgr
