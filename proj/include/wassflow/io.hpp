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

#include <json.hpp>

#include <string>

#include "wassflow/evac.hpp"
#include "wassflow/trajectory.hpp"
#include "wassflow/transport.hpp"

namespace wassflow {

/// 17 significant digits: round-trip exact for 64-bit doubles and byte-stable
/// across runs.
std::string fmt17(double value);

/// Flat record form of a measure: header `w,x_1,...,x_d`, one row per atom.
void write_measure_csv(const std::string& path, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(const std::string& path);

/// Structured-text object form of the same records.
nlohmann::json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const nlohmann::json& j);

/// Long-format trajectory: t, atom id, weight, coordinates, velocity
/// snapshot. The velocity at node k is the interval-k field at the atoms
/// (the final node reuses the last interval's right snapshot).
void write_bundle_csv(const std::string& path, const TrajectoryBundle& bundle);

/// Leader trajectory in the same long format (t, leader id, y..., w...).
void write_leaders_csv(const std::string& path, const TrajectoryBundle& bundle,
                       int space_dim, int leader_count);

/// Plan rows (i, j, mass).
void write_plan_csv(const std::string& path, const TransportPlan& plan);

/// CSV of (subdivision, gap) rows from relaxation experiments.
void write_gap_csv(const std::string& path,
                   const std::vector<std::pair<int, double>>& gaps);

nlohmann::json schedule_to_json(const ControlSchedule& schedule);
nlohmann::json grid_to_json(const TimeGrid& grid);
nlohmann::json estimates_to_json(const HypothesisEstimates& estimates);

/// Run manifest: tool and version, subcommand, seed, the echoed config, and
/// every artifact written by the run. Contains no clocks or machine state,
/// so identical runs serialize to identical bytes.
class Manifest {
 public:
  Manifest(const std::string& subcommand, std::uint64_t seed);

  void set_config(const std::string& path, const std::string& raw_text);
  void add_parameter(const std::string& key, const nlohmann::json& value);
  void add_output(const std::string& path, const std::string& kind);
  void write(const std::string& path) const;

 private:
  nlohmann::json root_;
};

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace wassflow
