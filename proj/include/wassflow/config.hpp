// Copyright 2026 The wassflow Authors
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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wassflow/evac.hpp"

namespace wassflow {

/// Configuration failure with the offending line and field spelled out.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& field, const std::string& message)
      : std::runtime_error("config line " + std::to_string(line) + ", " +
                           field + ": " + message),
        line_(line),
        field_(field) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// One parsed value from the scenario file (TOML-style scalars and flat
/// numeric arrays).
struct ConfigValue {
  enum class Kind { kNumber, kString, kBool, kArray };
  Kind kind = Kind::kNumber;
  double number = 0.0;
  std::string text;
  bool flag = false;
  std::vector<double> array;
  int line = 0;
};

/// Sections in file order; keys within each section keep their values and
/// source lines. Unknown sections or keys are rejected at scenario build.
struct ParsedConfig {
  std::map<std::string, std::map<std::string, ConfigValue>> sections;
  std::string source_path;
  std::string raw_text;
};

ParsedConfig parse_config_text(const std::string& text,
                               const std::string& path_label);
ParsedConfig parse_config_file(const std::string& path);

/// Extra knobs that live in the scenario file but belong to specific CLI
/// subcommands rather than the scenario itself.
struct ScenarioExtras {
  std::optional<RelaxedControl> relax_control;  // [optimizer] relax_*
  std::vector<Vec> value_atoms;                 // [optimizer] value_atoms
  int value_simplex_denominator = 4;            // [optimizer] value_Q
};

/// Builds the evacuation scenario (sampling the crowd deterministically from
/// the configured seed) and collects subcommand extras. `seed_override`
/// replaces the configured seed when set.
EvacScenario load_scenario(const ParsedConfig& config,
                           std::optional<std::uint64_t> seed_override,
                           ScenarioExtras* extras = nullptr);

}  // namespace wassflow
