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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "wassflow/config.hpp"

using namespace wassflow;

namespace {

const std::string kConfigDir = WASSFLOW_CONFIG_DIR;

std::string minimal_config() {
  return R"([crowd]
dim = 2
count = 4
box_low = [-1, -1]
box_high = [1, 1]

[leaders]
count = 1
positions = [0, 0]
velocities = [0, 0]

[regions]
target_kind = "ball"
target_center = [1, 0]
target_radius = 0.5
safe_kind = "box"
safe_low = [-5, -5]
safe_high = [5, 5]

[grid]
T = 1
steps = 10
)";
}

}  // namespace

TEST_CASE("shipped configs load and validate") {
  for (const std::string name :
       {"evac.toml", "evac_small.toml", "value_small.toml"}) {
    const ParsedConfig parsed = parse_config_file(kConfigDir + "/" + name);
    ScenarioExtras extras;
    const EvacScenario scenario = load_scenario(parsed, std::nullopt, &extras);
    CHECK(scenario.crowd0.size() >= 1);
    CHECK(scenario.grid.steps >= 1);
  }

  // the value config carries the search atoms
  const ParsedConfig value_cfg =
      parse_config_file(kConfigDir + "/value_small.toml");
  ScenarioExtras extras;
  load_scenario(value_cfg, std::nullopt, &extras);
  CHECK(extras.value_atoms.size() == 2);
  CHECK(extras.value_simplex_denominator == 4);
}

TEST_CASE("crowd sampling is seed-deterministic") {
  const ParsedConfig parsed = parse_config_text(minimal_config(), "mini");
  const EvacScenario a = load_scenario(parsed, 42, nullptr);
  const EvacScenario b = load_scenario(parsed, 42, nullptr);
  CHECK((a.crowd0.measure().points().array() ==
         b.crowd0.measure().points().array())
            .all());
  const EvacScenario c = load_scenario(parsed, 43, nullptr);
  CHECK((a.crowd0.measure().points().array() !=
         c.crowd0.measure().points().array())
            .any());
  // defaults apply when sections are omitted
  CHECK(a.congestion.C == 5.0);
  CHECK(a.kernels.cs.K == 1.0);
  CHECK(a.optimizer.seed == 42);
}

TEST_CASE("unknown sections and keys are rejected with their line") {
  const std::string with_unknown_key = minimal_config() + "\n[kernels]\nbogus = 3\n";
  ScenarioExtras extras;
  try {
    load_scenario(parse_config_text(with_unknown_key, "mini"), std::nullopt,
                  &extras);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "kernels.bogus");
    CHECK(e.line() > 0);
  }

  const std::string with_unknown_section = minimal_config() + "\n[plotting]\nx = 1\n";
  CHECK_THROWS_AS(load_scenario(parse_config_text(with_unknown_section, "mini"),
                                std::nullopt, nullptr),
                  ConfigError);
}

TEST_CASE("malformed lines are reported with positions") {
  CHECK_THROWS_AS(parse_config_text("[crowd]\ndim 2\n", "x"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("dim = 2\n", "x"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[crowd]\ndim = [1, oops]\n", "x"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("[crowd]\ndim = \"unterminated\n", "x"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("[crowd]\na = 1\na = 2\n", "x"),
                  ConfigError);

  try {
    parse_config_text("[crowd]\ndim = 2\nwhat\n", "x");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("semantic validation of scenario fields") {
  // wrong array length
  std::string bad = minimal_config();
  bad.replace(bad.find("positions = [0, 0]"), 18, "positions = [0, 0, 1]");
  CHECK_THROWS_AS(load_scenario(parse_config_text(bad, "x"), std::nullopt,
                                nullptr),
                  ConfigError);

  // non-integer steps
  std::string frac = minimal_config();
  frac.replace(frac.find("steps = 10"), 10, "steps = 2.5");
  CHECK_THROWS_AS(load_scenario(parse_config_text(frac, "x"), std::nullopt,
                                nullptr),
                  ConfigError);

  // unknown region kind
  std::string region = minimal_config();
  region.replace(region.find("target_kind = \"ball\""), 20,
                 "target_kind = \"blob\"");
  CHECK_THROWS_AS(load_scenario(parse_config_text(region, "x"), std::nullopt,
                                nullptr),
                  ConfigError);

  // missing required section
  const std::string no_grid = R"([crowd]
dim = 2
count = 4
box_low = [-1, -1]
box_high = [1, 1]

[leaders]
count = 1
positions = [0, 0]
velocities = [0, 0]

[regions]
target_kind = "ball"
target_center = [1, 0]
target_radius = 0.5
safe_kind = "box"
safe_low = [-5, -5]
safe_high = [5, 5]
)";
  CHECK_THROWS_AS(load_scenario(parse_config_text(no_grid, "x"), std::nullopt,
                                nullptr),
                  ConfigError);
}

TEST_CASE("relax extras parse and validate") {
  std::string with_relax = minimal_config() + R"(
[optimizer]
seed = 1
relax_atoms = [1, 0, -1, 0]
relax_weights = [0.25, 0.75]
)";
  ScenarioExtras extras;
  load_scenario(parse_config_text(with_relax, "x"), std::nullopt, &extras);
  REQUIRE(extras.relax_control.has_value());
  CHECK(extras.relax_control->atom_count() == 2);
  CHECK(extras.relax_control->steps() == 10);

  std::string bad_len = minimal_config() + R"(
[optimizer]
relax_atoms = [1, 0, -1]
relax_weights = [0.5, 0.5]
)";
  CHECK_THROWS_AS(load_scenario(parse_config_text(bad_len, "x"), std::nullopt,
                                &extras),
                  ConfigError);
}
