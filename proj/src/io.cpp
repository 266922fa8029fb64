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

#include "wassflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace wassflow {

std::string fmt17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // no platform newline mangling
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
  std::ofstream out = open_out(path);
  out << "w";
  for (int c = 1; c <= mu.dim(); ++c) out << ",x_" << c;
  out << "\n";
  for (int i = 0; i < mu.size(); ++i) {
    out << fmt17(mu.weights()[i]);
    for (int c = 0; c < mu.dim(); ++c) {
      out << "," << fmt17(mu.points()(c, i));
    }
    out << "\n";
  }
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open measure file " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument(path + ": empty measure file");
  }
  if (line.rfind("w", 0) != 0) {
    throw std::invalid_argument(path + ": expected header starting with 'w'");
  }
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                    ": bad number '" + cell + "'");
      }
    }
    if (row.size() < 2) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": need a weight and at least one coordinate");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no atoms");
  const int d = static_cast<int>(rows.front().size()) - 1;
  Mat points(d, rows.size());
  Vec weights(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    weights[i] = rows[i][0];
    for (int c = 0; c < d; ++c) points(c, i) = rows[i][c + 1];
  }
  return DiscreteMeasure(std::move(points), std::move(weights));
}

nlohmann::json measure_to_json(const DiscreteMeasure& mu) {
  nlohmann::json atoms = nlohmann::json::array();
  for (int i = 0; i < mu.size(); ++i) {
    nlohmann::json coords = nlohmann::json::array();
    for (int c = 0; c < mu.dim(); ++c) coords.push_back(mu.points()(c, i));
    atoms.push_back({{"w", mu.weights()[i]}, {"x", coords}});
  }
  return {{"dim", mu.dim()}, {"atoms", atoms}};
}

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  const int d = j.at("dim").get<int>();
  const auto& atoms = j.at("atoms");
  if (atoms.empty()) throw std::invalid_argument("measure json has no atoms");
  Mat points(d, atoms.size());
  Vec weights(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    weights[i] = atoms[i].at("w").get<double>();
    const auto& coords = atoms[i].at("x");
    if (static_cast<int>(coords.size()) != d) {
      throw std::invalid_argument("measure json atom dimension mismatch");
    }
    for (int c = 0; c < d; ++c) points(c, i) = coords[c].get<double>();
  }
  return DiscreteMeasure(std::move(points), std::move(weights));
}

void write_bundle_csv(const std::string& path, const TrajectoryBundle& bundle) {
  std::ofstream out = open_out(path);
  const int d = bundle.dim();
  out << "t,id,w";
  for (int c = 1; c <= d; ++c) out << ",x_" << c;
  for (int c = 1; c <= d; ++c) out << ",v_" << c;
  out << "\n";
  for (int k = 0; k <= bundle.grid.steps; ++k) {
    const Mat& vel =
        k < bundle.grid.steps ? bundle.vel_left[k] : bundle.vel_right.back();
    for (int i = 0; i < bundle.atom_count(); ++i) {
      out << fmt17(bundle.grid.time(k)) << "," << i << ","
          << fmt17(bundle.weights[i]);
      for (int c = 0; c < d; ++c) out << "," << fmt17(bundle.points[k](c, i));
      for (int c = 0; c < d; ++c) out << "," << fmt17(vel(c, i));
      out << "\n";
    }
  }
}

void write_leaders_csv(const std::string& path, const TrajectoryBundle& bundle,
                       int space_dim, int leader_count) {
  std::ofstream out = open_out(path);
  out << "t,id";
  for (int c = 1; c <= space_dim; ++c) out << ",y_" << c;
  for (int c = 1; c <= space_dim; ++c) out << ",w_" << c;
  out << "\n";
  for (int k = 0; k <= bundle.grid.steps; ++k) {
    const LeaderState leaders =
        LeaderState::unflatten(bundle.aux[k], space_dim, leader_count);
    for (int i = 0; i < leader_count; ++i) {
      out << fmt17(bundle.grid.time(k)) << "," << i;
      for (int c = 0; c < space_dim; ++c) {
        out << "," << fmt17(leaders.positions(c, i));
      }
      for (int c = 0; c < space_dim; ++c) {
        out << "," << fmt17(leaders.velocities(c, i));
      }
      out << "\n";
    }
  }
}

void write_plan_csv(const std::string& path, const TransportPlan& plan) {
  std::ofstream out = open_out(path);
  out << "i,j,mass\n";
  for (const auto& entry : plan.entries) {
    out << entry.i << "," << entry.j << "," << fmt17(entry.mass) << "\n";
  }
}

void write_gap_csv(const std::string& path,
                   const std::vector<std::pair<int, double>>& gaps) {
  std::ofstream out = open_out(path);
  out << "subdivision,gap\n";
  for (const auto& [n, gap] : gaps) {
    out << n << "," << fmt17(gap) << "\n";
  }
}

nlohmann::json schedule_to_json(const ControlSchedule& schedule) {
  nlohmann::json values = nlohmann::json::array();
  for (const Vec& u : schedule.values) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < u.size(); ++c) row.push_back(u[c]);
    values.push_back(row);
  }
  return values;
}

nlohmann::json grid_to_json(const TimeGrid& grid) {
  return {{"t0", grid.t0}, {"T", grid.T}, {"steps", grid.steps}};
}

nlohmann::json estimates_to_json(const HypothesisEstimates& estimates) {
  return {{"m_hat", estimates.m_hat},
          {"lK_hat", estimates.lK_hat},
          {"LK_hat", estimates.LK_hat},
          {"violation", estimates.violation},
          {"skipped_pairs", estimates.skipped_pairs},
          {"note", estimates.note}};
}

Manifest::Manifest(const std::string& subcommand, std::uint64_t seed) {
  root_["tool"] = "wassflow";
  root_["version"] = kVersion;
  root_["subcommand"] = subcommand;
  root_["seed"] = seed;
  root_["outputs"] = nlohmann::json::array();
  root_["parameters"] = nlohmann::json::object();
}

void Manifest::set_config(const std::string& path, const std::string& raw_text) {
  root_["config_path"] = path;
  root_["config_text"] = raw_text;
}

void Manifest::add_parameter(const std::string& key,
                             const nlohmann::json& value) {
  root_["parameters"][key] = value;
}

void Manifest::add_output(const std::string& path, const std::string& kind) {
  root_["outputs"].push_back({{"path", path}, {"kind", kind}});
}

void Manifest::write(const std::string& path) const {
  write_json(path, root_);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace wassflow
