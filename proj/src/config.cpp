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

#include "wassflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wassflow {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_number(const std::string& text, double* out) {
  std::size_t used = 0;
  try {
    *out = std::stod(text, &used);
  } catch (...) {
    return false;
  }
  return used == text.size();
}

ConfigValue parse_value(const std::string& text, int line,
                        const std::string& key) {
  ConfigValue value;
  value.line = line;
  if (text.empty()) throw ConfigError(line, key, "missing value");
  if (text.front() == '[') {
    if (text.back() != ']') throw ConfigError(line, key, "unterminated array");
    value.kind = ConfigValue::Kind::kArray;
    std::string body = text.substr(1, text.size() - 2);
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream stream(body);
    std::string token;
    while (stream >> token) {
      double num = 0;
      if (!parse_number(token, &num)) {
        throw ConfigError(line, key, "array entry '" + token + "' is not a number");
      }
      value.array.push_back(num);
    }
    return value;
  }
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') {
      throw ConfigError(line, key, "unterminated string");
    }
    value.kind = ConfigValue::Kind::kString;
    value.text = text.substr(1, text.size() - 2);
    return value;
  }
  if (text == "true" || text == "false") {
    value.kind = ConfigValue::Kind::kBool;
    value.flag = (text == "true");
    return value;
  }
  if (!parse_number(text, &value.number)) {
    throw ConfigError(line, key, "value '" + text + "' is not a number");
  }
  value.kind = ConfigValue::Kind::kNumber;
  return value;
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text,
                               const std::string& path_label) {
  ParsedConfig config;
  config.source_path = path_label;
  config.raw_text = text;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(lineno, line, "unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(lineno, line, "empty section name");
      config.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(lineno, line, "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(lineno, line, "empty key");
    if (section.empty()) {
      throw ConfigError(lineno, key, "key outside of any [section]");
    }
    auto& sec = config.sections[section];
    if (sec.count(key)) {
      throw ConfigError(lineno, section + "." + key, "duplicate key");
    }
    sec[key] = parse_value(trim(line.substr(eq + 1)), lineno, key);
  }
  return config;
}

ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(0, path, "cannot open config file");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

namespace {

class SectionReader {
 public:
  SectionReader(const ParsedConfig& config, const std::string& name,
                bool required)
      : name_(name) {
    const auto it = config.sections.find(name);
    if (it == config.sections.end()) {
      if (required) throw ConfigError(0, name, "missing required [section]");
      section_ = nullptr;
    } else {
      section_ = &it->second;
    }
  }

  bool present() const { return section_ != nullptr; }

  double number(const std::string& key) {
    const ConfigValue& v = get(key, ConfigValue::Kind::kNumber);
    return v.number;
  }
  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }
  long integer(const std::string& key) {
    const double num = number(key);
    const long rounded = std::lround(num);
    if (std::abs(num - rounded) > 1e-9) {
      throw ConfigError(line_of(key), name_ + "." + key, "expected an integer");
    }
    return rounded;
  }
  long integer_or(const std::string& key, long fallback) {
    return has(key) ? integer(key) : fallback;
  }
  std::string text(const std::string& key) {
    return get(key, ConfigValue::Kind::kString).text;
  }
  std::string text_or(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : fallback;
  }
  std::vector<double> array(const std::string& key, int expected_size = -1) {
    const ConfigValue& v = get(key, ConfigValue::Kind::kArray);
    if (expected_size >= 0 &&
        static_cast<int>(v.array.size()) != expected_size) {
      throw ConfigError(v.line, name_ + "." + key,
                        "expected " + std::to_string(expected_size) +
                            " entries, got " + std::to_string(v.array.size()));
    }
    return v.array;
  }
  bool has(const std::string& key) const {
    return section_ && section_->count(key) > 0;
  }
  int line_of(const std::string& key) const {
    return has(key) ? section_->at(key).line : 0;
  }

  /// Every key must have been consumed through mark(); leftovers are errors.
  void reject_unknown(const std::set<std::string>& allowed) const {
    if (!section_) return;
    for (const auto& [key, value] : *section_) {
      if (!allowed.count(key)) {
        throw ConfigError(value.line, name_ + "." + key, "unknown key");
      }
    }
  }

 private:
  const ConfigValue& get(const std::string& key, ConfigValue::Kind kind) {
    if (!section_ || !section_->count(key)) {
      throw ConfigError(0, name_ + "." + key, "missing required key");
    }
    const ConfigValue& v = section_->at(key);
    if (v.kind != kind) {
      throw ConfigError(v.line, name_ + "." + key, "wrong value type");
    }
    return v;
  }

  std::string name_;
  const std::map<std::string, ConfigValue>* section_;
};

Vec to_vec(const std::vector<double>& values) {
  Vec v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
  return v;
}

RegionSpec read_region(SectionReader& reader, const std::string& prefix,
                       int dim) {
  const std::string kind = reader.text(prefix + "_kind");
  if (kind == "ball") {
    return RegionSpec::ball(to_vec(reader.array(prefix + "_center", dim)),
                            reader.number(prefix + "_radius"));
  }
  if (kind == "box") {
    return RegionSpec::box(to_vec(reader.array(prefix + "_low", dim)),
                           to_vec(reader.array(prefix + "_high", dim)));
  }
  if (kind == "halfspace") {
    return RegionSpec::half_space(to_vec(reader.array(prefix + "_normal", dim)),
                                  reader.number(prefix + "_offset"));
  }
  throw ConfigError(reader.line_of(prefix + "_kind"), prefix + "_kind",
                    "expected 'ball', 'box' or 'halfspace'");
}

}  // namespace

EvacScenario load_scenario(const ParsedConfig& config,
                           std::optional<std::uint64_t> seed_override,
                           ScenarioExtras* extras) {
  static const std::set<std::string> known_sections = {
      "crowd", "leaders", "kernels", "congestion",
      "regions", "grid", "optimizer"};
  for (const auto& [name, section] : config.sections) {
    if (!known_sections.count(name)) {
      const int line = section.empty() ? 0 : section.begin()->second.line;
      throw ConfigError(line, name, "unknown section");
    }
  }

  SectionReader crowd(config, "crowd", true);
  SectionReader leaders(config, "leaders", true);
  SectionReader kernels(config, "kernels", false);
  SectionReader congestion(config, "congestion", false);
  SectionReader regions(config, "regions", true);
  SectionReader grid(config, "grid", true);
  SectionReader optimizer(config, "optimizer", false);

  const int d = static_cast<int>(crowd.integer("dim"));
  if (d < 1) throw ConfigError(crowd.line_of("dim"), "crowd.dim", "dim >= 1");

  EvacScenario scenario;

  // [grid]
  scenario.grid.t0 = grid.number_or("t0", 0.0);
  scenario.grid.T = grid.number("T");
  scenario.grid.steps = static_cast<int>(grid.integer("steps"));
  scenario.grid.validate();
  grid.reject_unknown({"t0", "T", "steps"});

  // [optimizer]
  OptimizerOptions& opts = scenario.optimizer;
  opts.seed = optimizer.present()
                  ? static_cast<std::uint64_t>(optimizer.integer_or("seed", 0))
                  : 0;
  if (seed_override) opts.seed = *seed_override;
  opts.starts = static_cast<int>(optimizer.integer_or("starts", 8));
  opts.max_evals_per_start =
      static_cast<int>(optimizer.integer_or("max_evals", 120));
  opts.control_knots = static_cast<int>(optimizer.integer_or("control_knots", 4));
  opts.penalty_run = optimizer.number_or("penalty_run", 100.0);
  opts.penalty_terminal = optimizer.number_or("penalty_terminal", 100.0);

  const std::string cost_kind =
      optimizer.present() ? optimizer.text_or("cost", "indicator") : "indicator";
  if (cost_kind == "indicator") {
    scenario.cost = CostSpec::indicator();
  } else if (cost_kind == "mollified") {
    scenario.cost = CostSpec::mollified(optimizer.number_or("mollify_eps", 0.25));
  } else {
    throw ConfigError(optimizer.line_of("cost"), "optimizer.cost",
                      "expected 'indicator' or 'mollified'");
  }

  // [crowd] - atoms sampled uniformly from a box, constant initial velocity.
  const int count = static_cast<int>(crowd.integer("count"));
  if (count < 1) {
    throw ConfigError(crowd.line_of("count"), "crowd.count", "count >= 1");
  }
  const Vec low = to_vec(crowd.array("box_low", d));
  const Vec high = to_vec(crowd.array("box_high", d));
  if ((low.array() > high.array()).any()) {
    throw ConfigError(crowd.line_of("box_low"), "crowd.box_low",
                      "box_low must not exceed box_high");
  }
  const Vec velocity0 = crowd.has("velocity")
                            ? to_vec(crowd.array("velocity", d))
                            : Vec(Vec::Zero(d));
  Rng crowd_rng = Rng(opts.seed).derive(1001);
  Mat phase_points(2 * d, count);
  for (int i = 0; i < count; ++i) {
    for (int c = 0; c < d; ++c) {
      phase_points(c, i) = crowd_rng.uniform(low[c], high[c]);
    }
    phase_points.col(i).tail(d) = velocity0;
  }
  scenario.crowd0 = PhaseMeasure(DiscreteMeasure::uniform(std::move(phase_points)));
  crowd.reject_unknown({"dim", "count", "box_low", "box_high", "velocity"});

  // [leaders]
  const int M = static_cast<int>(leaders.integer("count"));
  if (M < 1) {
    throw ConfigError(leaders.line_of("count"), "leaders.count", "count >= 1");
  }
  const Vec ly = to_vec(leaders.array("positions", d * M));
  const Vec lw = to_vec(leaders.array("velocities", d * M));
  scenario.leaders0.positions.resize(d, M);
  scenario.leaders0.velocities.resize(d, M);
  for (int i = 0; i < M; ++i) {
    scenario.leaders0.positions.col(i) = ly.segment(i * d, d);
    scenario.leaders0.velocities.col(i) = lw.segment(i * d, d);
  }
  leaders.reject_unknown({"count", "positions", "velocities"});

  // [kernels]
  scenario.kernels.cs.K = kernels.number_or("K", 1.0);
  scenario.kernels.cs.sigma = kernels.number_or("sigma", 1.0);
  scenario.kernels.cs.beta = kernels.number_or("beta", 0.5);
  scenario.kernels.morse.R1 = kernels.number_or("R1", 0.5);
  scenario.kernels.morse.R2 = kernels.number_or("R2", 0.5);
  scenario.kernels.morse.A1 = kernels.number_or("A1", 1.0);
  scenario.kernels.morse.A2 = kernels.number_or("A2", 1.0);
  scenario.kernels.mollifier.radius = kernels.number_or("mollifier_radius", 0.5);
  const std::string variant =
      kernels.present() ? kernels.text_or("morse_variant", "as-written")
                        : "as-written";
  if (variant == "as-written") {
    scenario.kernels.morse_variant = MorseVariant::kAsWritten;
  } else if (variant == "positional") {
    scenario.kernels.morse_variant = MorseVariant::kPositional;
  } else {
    throw ConfigError(kernels.line_of("morse_variant"), "kernels.morse_variant",
                      "expected 'as-written' or 'positional'");
  }
  scenario.kernels.validate();
  kernels.reject_unknown({"K", "sigma", "beta", "R1", "R2", "A1", "A2",
                          "mollifier_radius", "morse_variant"});

  // [congestion]
  scenario.congestion.C = congestion.number_or("C", 5.0);
  scenario.congestion.eta = congestion.number_or("eta", 0.5);
  scenario.congestion.validate();
  congestion.reject_unknown({"C", "eta"});

  // [regions]
  scenario.target = read_region(regions, "target", d);
  scenario.safe = read_region(regions, "safe", d);
  regions.reject_unknown({"target_kind", "target_center", "target_radius",
                          "target_low", "target_high", "target_normal",
                          "target_offset", "safe_kind", "safe_center",
                          "safe_radius", "safe_low", "safe_high", "safe_normal",
                          "safe_offset"});

  // subcommand extras under [optimizer]
  if (extras) {
    const int control_dim = d * M;
    if (optimizer.has("relax_atoms")) {
      const std::vector<double> flat = optimizer.array("relax_atoms");
      if (flat.empty() || flat.size() % control_dim != 0) {
        throw ConfigError(optimizer.line_of("relax_atoms"),
                          "optimizer.relax_atoms",
                          "length must be a positive multiple of dim*leaders");
      }
      const int K = static_cast<int>(flat.size()) / control_dim;
      std::vector<Vec> atoms;
      for (int k = 0; k < K; ++k) {
        Vec atom(control_dim);
        for (int c = 0; c < control_dim; ++c) atom[c] = flat[k * control_dim + c];
        atoms.push_back(std::move(atom));
      }
      const Vec lambda = to_vec(optimizer.array("relax_weights", K));
      extras->relax_control =
          RelaxedControl::constant_weights(std::move(atoms), lambda,
                                           scenario.grid.steps);
    }
    if (optimizer.has("value_atoms")) {
      const std::vector<double> flat = optimizer.array("value_atoms");
      if (flat.empty() || flat.size() % control_dim != 0) {
        throw ConfigError(optimizer.line_of("value_atoms"),
                          "optimizer.value_atoms",
                          "length must be a positive multiple of dim*leaders");
      }
      const int K = static_cast<int>(flat.size()) / control_dim;
      for (int k = 0; k < K; ++k) {
        Vec atom(control_dim);
        for (int c = 0; c < control_dim; ++c) atom[c] = flat[k * control_dim + c];
        extras->value_atoms.push_back(std::move(atom));
      }
    }
    extras->value_simplex_denominator =
        static_cast<int>(optimizer.integer_or("value_Q", 4));
  }
  optimizer.reject_unknown({"seed", "starts", "max_evals", "control_knots",
                            "penalty_run", "penalty_terminal", "cost",
                            "mollify_eps", "relax_atoms", "relax_weights",
                            "value_atoms", "value_Q"});

  scenario.validate();
  return scenario;
}

}  // namespace wassflow
