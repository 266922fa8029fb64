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

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "wassflow/config.hpp"
#include "wassflow/io.hpp"
#include "wassflow/relaxation.hpp"

namespace fs = std::filesystem;
using namespace wassflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
};

std::string out_path(const CommonArgs& args, const std::string& name) {
  return (fs::path(args.out_dir) / name).string();
}

void ensure_out_dir(const CommonArgs& args) {
  fs::create_directories(args.out_dir);
}

int optimizer_threads() {
  const char* env = std::getenv("WASSFLOW_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

struct LoadedScenario {
  ParsedConfig parsed;
  EvacScenario scenario;
  ScenarioExtras extras;
};

LoadedScenario load(const CommonArgs& args) {
  LoadedScenario loaded;
  loaded.parsed = parse_config_file(args.config_path);
  loaded.scenario = load_scenario(loaded.parsed, args.seed, &loaded.extras);
  return loaded;
}

Manifest make_manifest(const std::string& subcommand, const CommonArgs& args,
                       const LoadedScenario* loaded) {
  const std::uint64_t seed =
      loaded ? loaded->scenario.optimizer.seed : args.seed.value_or(0);
  Manifest manifest(subcommand, seed);
  if (loaded) {
    manifest.set_config(args.config_path, loaded->parsed.raw_text);
  }
  return manifest;
}

int run_w1(const std::string& file_a, const std::string& file_b,
           bool dump_plan, const CommonArgs& args) {
  const DiscreteMeasure mu = read_measure_csv(file_a);
  const DiscreteMeasure nu = read_measure_csv(file_b);
  const W1Result result = w1(mu, nu);

  ensure_out_dir(args);
  Manifest manifest("w1", args.seed.value_or(0));
  manifest.add_parameter("file_a", file_a);
  manifest.add_parameter("file_b", file_b);
  manifest.add_parameter("value", result.value);
  write_json(out_path(args, "w1.json"),
             {{"value", result.value},
              {"atoms_a", mu.size()},
              {"atoms_b", nu.size()},
              {"plan_entries", result.plan.entries.size()}});
  manifest.add_output("w1.json", "w1 value");
  if (dump_plan) {
    write_plan_csv(out_path(args, "plan.csv"), result.plan);
    manifest.add_output("plan.csv", "optimal plan");
  }
  manifest.write(out_path(args, "manifest.json"));

  std::cout << "w1 = " << fmt17(result.value) << "\n";
  return kExitOk;
}

int run_simulate(const CommonArgs& args, bool zero_control) {
  const LoadedScenario loaded = load(args);
  const EvacScenario& scenario = loaded.scenario;
  const ControlSystem system = make_evac_system(scenario);
  const int cd = system.control_dim;

  ControlSchedule raw;
  if (zero_control) {
    raw = ControlSchedule::zeros(cd, scenario.grid.steps);
  } else {
    // a seeded admissible schedule: uniform in the outer acceleration box,
    // projected onto the congestion set interval by interval
    Rng rng = Rng(scenario.optimizer.seed).derive(2002);
    raw.values.reserve(scenario.grid.steps);
    for (int k = 0; k < scenario.grid.steps; ++k) {
      raw.values.push_back(
          rng.uniform_vec(cd, -scenario.congestion.C, scenario.congestion.C));
    }
  }
  const TrajectoryBundle bundle =
      solve_projected(system, scenario.crowd0.measure(), raw, scenario.grid,
                      scenario.leaders0.flatten());

  double max_lambda = 0.0;
  for (int k = 0; k <= scenario.grid.steps; ++k) {
    max_lambda = std::max(
        max_lambda,
        lambda_constraint(
            project_positions(bundle.measure_at(k), scenario.crowd0.space_dim()),
            scenario.safe));
  }

  ensure_out_dir(args);
  Manifest manifest = make_manifest("simulate", args, &loaded);
  manifest.add_parameter("zero_control", zero_control);
  manifest.add_parameter("grid", grid_to_json(scenario.grid));
  manifest.add_parameter("schedule", schedule_to_json(bundle.schedule));
  manifest.add_parameter("max_lambda", max_lambda);
  write_bundle_csv(out_path(args, "trajectory.csv"), bundle);
  manifest.add_output("trajectory.csv", "crowd trajectory");
  write_leaders_csv(out_path(args, "leaders.csv"), bundle,
                    scenario.crowd0.space_dim(), scenario.leaders0.count());
  manifest.add_output("leaders.csv", "leader trajectory");
  manifest.write(out_path(args, "manifest.json"));

  std::cout << "simulate: steps=" << scenario.grid.steps
            << " atoms=" << bundle.atom_count()
            << " max_lambda=" << fmt17(max_lambda) << "\n";
  return kExitOk;
}

int run_probe(const CommonArgs& args) {
  const LoadedScenario loaded = load(args);
  const MayerProblem problem = build_problem(loaded.scenario);

  ensure_out_dir(args);
  Manifest manifest = make_manifest("probe", args, &loaded);
  write_json(out_path(args, "probe.json"), estimates_to_json(problem.probes));
  manifest.add_output("probe.json", "hypothesis estimates");
  manifest.write(out_path(args, "manifest.json"));

  std::cout << "probe: m_hat=" << fmt17(problem.probes.m_hat)
            << " lK_hat=" << fmt17(problem.probes.lK_hat)
            << " LK_hat=" << fmt17(problem.probes.LK_hat)
            << " violation=" << (problem.probes.violation ? "yes" : "no")
            << "\n";
  return problem.probes.violation ? kExitSolver : kExitOk;
}

int run_relax(const CommonArgs& args, const std::string& subdivisions_arg,
              int relax_steps) {
  const LoadedScenario loaded = load(args);
  const EvacScenario& scenario = loaded.scenario;

  std::vector<int> subdivisions;
  {
    std::stringstream stream(subdivisions_arg);
    std::string token;
    while (std::getline(stream, token, ',')) {
      const int n = std::atoi(token.c_str());
      if (n < 1) {
        throw std::invalid_argument("bad subdivision '" + token + "'");
      }
      subdivisions.push_back(n);
    }
  }
  if (subdivisions.empty()) {
    throw std::invalid_argument("no subdivisions given");
  }

  // The gap experiment runs on a coarsened copy of the scenario grid so the
  // refined solves stay cheap.
  TimeGrid gap_grid{scenario.grid.t0, scenario.grid.T,
                    std::min(scenario.grid.steps, relax_steps)};
  RelaxedControl relaxed =
      loaded.extras.relax_control.value_or(default_relaxed_control(scenario));
  relaxed.weights.assign(gap_grid.steps,
                         relaxed.weights.empty() ? Vec() : relaxed.weights[0]);

  const ControlSystem system = make_evac_system(scenario);
  std::vector<std::pair<int, double>> gaps;
  for (const int n : subdivisions) {
    const double gap = relaxation_gap(system, scenario.crowd0.measure(),
                                      relaxed, gap_grid, n,
                                      ChatteringMode::kInterleaved,
                                      scenario.leaders0.flatten());
    gaps.emplace_back(n, gap);
  }

  bool decreasing = true;
  nlohmann::json ratios = nlohmann::json::array();
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    decreasing = decreasing && gaps[i].second < gaps[i - 1].second;
    ratios.push_back(gaps[i - 1].second > 0
                         ? gaps[i].second / gaps[i - 1].second
                         : 0.0);
  }

  ensure_out_dir(args);
  Manifest manifest = make_manifest("relax", args, &loaded);
  manifest.add_parameter("subdivisions", subdivisions);
  manifest.add_parameter("gap_grid", grid_to_json(gap_grid));
  write_gap_csv(out_path(args, "relax.csv"), gaps);
  manifest.add_output("relax.csv", "subdivision gaps");
  nlohmann::json verdict = {{"strictly_decreasing", decreasing},
                            {"ratios", ratios}};
  write_json(out_path(args, "relax.json"), verdict);
  manifest.add_output("relax.json", "gap verdict");
  manifest.write(out_path(args, "manifest.json"));

  std::cout << "relax: gaps";
  for (const auto& [n, gap] : gaps) std::cout << " " << n << ":" << fmt17(gap);
  std::cout << " decreasing=" << (decreasing ? "yes" : "no") << "\n";
  return kExitOk;
}

int run_value(const CommonArgs& args, const std::string& mode) {
  const LoadedScenario loaded = load(args);
  if (loaded.extras.value_atoms.empty()) {
    throw std::invalid_argument(
        "value needs [optimizer] value_atoms in the config");
  }
  const MayerProblem problem = build_problem(loaded.scenario);
  SearchSpec search;
  search.atoms = loaded.extras.value_atoms;
  search.simplex_denominator = loaded.extras.value_simplex_denominator;

  nlohmann::json report;
  std::optional<double> ordinary, relaxed;
  if (mode == "ordinary" || mode == "both") {
    const ValueResult r =
        value_function(problem, problem.grid.t0, problem.mu0,
                       ValueMode::kOrdinary, search, problem.aux0);
    ordinary = r.value;
    report["ordinary"] = {{"value", r.value},
                          {"candidates", r.candidates},
                          {"argmin_schedule", schedule_to_json(r.argmin_schedule)}};
  }
  if (mode == "relaxed" || mode == "both") {
    const ValueResult r =
        value_function(problem, problem.grid.t0, problem.mu0,
                       ValueMode::kRelaxed, search, problem.aux0);
    relaxed = r.value;
    report["relaxed"] = {{"value", r.value}, {"candidates", r.candidates}};
  }
  if (ordinary && relaxed) report["gap"] = *ordinary - *relaxed;

  ensure_out_dir(args);
  Manifest manifest = make_manifest("value", args, &loaded);
  manifest.add_parameter("mode", mode);
  write_json(out_path(args, "value.json"), report);
  manifest.add_output("value.json", "value functions");
  manifest.write(out_path(args, "manifest.json"));

  std::cout << "value:";
  if (ordinary) std::cout << " ordinary=" << fmt17(*ordinary);
  if (relaxed) std::cout << " relaxed=" << fmt17(*relaxed);
  std::cout << "\n";
  return kExitOk;
}

int run_optimize(const CommonArgs& args) {
  const LoadedScenario loaded = load(args);
  const EvacScenario& scenario = loaded.scenario;
  const MayerProblem problem = build_problem(scenario);

  OptimizerOptions options = scenario.optimizer;
  options.threads = optimizer_threads();
  // warm start: every knot aims the leaders at the target
  const Vec aim = aim_control(scenario, 0.6 * scenario.congestion.C);
  Vec warm(options.control_knots * problem.system.control_dim);
  for (int j = 0; j < options.control_knots; ++j) {
    warm.segment(j * problem.system.control_dim, problem.system.control_dim) =
        aim;
  }
  options.warm_starts = {warm};

  const SolveReport report = solve_mayer(problem, options);
  const double fraction =
      -evaluate_cost(CostSpec::indicator(),
                     project_positions(report.best_bundle.measure_at(
                                           problem.grid.steps),
                                       problem.position_dim),
                     problem.target);

  ensure_out_dir(args);
  Manifest manifest = make_manifest("optimize", args, &loaded);
  nlohmann::json rj = {{"cost", report.cost},
                       {"fraction_evacuated", fraction},
                       {"feasible", report.feasible},
                       {"max_lambda", report.max_lambda},
                       {"terminal_distance", report.terminal_distance},
                       {"evaluations", report.evaluations},
                       {"best_start", report.best_start},
                       {"seed", report.seed},
                       {"trace", report.trace},
                       {"grid", grid_to_json(problem.grid)},
                       {"probes", estimates_to_json(problem.probes)},
                       {"best_schedule", schedule_to_json(report.best_schedule)}};
  write_json(out_path(args, "report.json"), rj);
  manifest.add_output("report.json", "solve report");
  write_bundle_csv(out_path(args, "trajectory.csv"), report.best_bundle);
  manifest.add_output("trajectory.csv", "best trajectory");
  write_leaders_csv(out_path(args, "leaders.csv"), report.best_bundle,
                    scenario.crowd0.space_dim(), scenario.leaders0.count());
  manifest.add_output("leaders.csv", "best leader trajectory");
  manifest.write(out_path(args, "manifest.json"));

  std::cout << "optimize: cost=" << fmt17(report.cost)
            << " fraction=" << fmt17(fraction)
            << " feasible=" << (report.feasible ? "yes" : "no")
            << " evals=" << report.evaluations << "\n";
  return report.feasible ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wassflow: particle toolkit for optimal transport and "
               "mean-field control"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string file_a, file_b, subdivisions = "4,8,16,32", mode = "both";
  bool dump_plan = false, zero_control = false;
  long seed_arg = -1;
  int relax_steps = 10;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config) {
      cmd->add_option("--config", args.config_path, "scenario config file")
          ->required();
    }
    cmd->add_option("--seed", seed_arg, "override the config seed");
    cmd->add_option("--out", args.out_dir, "output directory");
  };

  CLI::App* w1_cmd = app.add_subcommand("w1", "exact W1 between measure files");
  w1_cmd->add_option("fileA", file_a, "first measure CSV")->required();
  w1_cmd->add_option("fileB", file_b, "second measure CSV")->required();
  w1_cmd->add_flag("--plan", dump_plan, "dump the optimal plan as CSV");
  add_common(w1_cmd, false);

  CLI::App* sim_cmd = app.add_subcommand("simulate", "integrate the scenario");
  sim_cmd->add_flag("--zero-control", zero_control,
                    "use the zero control (default: seeded random control)");
  add_common(sim_cmd, true);

  CLI::App* probe_cmd =
      app.add_subcommand("probe", "empirical hypothesis probes");
  add_common(probe_cmd, true);

  CLI::App* relax_cmd =
      app.add_subcommand("relax", "chattering gap vs subdivision");
  relax_cmd->add_option("--subdivisions", subdivisions,
                        "comma-separated subdivision counts");
  relax_cmd->add_option("--relax-steps", relax_steps,
                        "coarse grid intervals for the gap experiment");
  add_common(relax_cmd, true);

  CLI::App* value_cmd =
      app.add_subcommand("value", "ordinary vs relaxed value function");
  value_cmd->add_option("--mode", mode, "ordinary | relaxed | both")
      ->check(CLI::IsMember({"ordinary", "relaxed", "both"}));
  add_common(value_cmd, true);

  CLI::App* opt_cmd = app.add_subcommand("optimize", "solve the Mayer problem");
  add_common(opt_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (seed_arg >= 0) args.seed = static_cast<std::uint64_t>(seed_arg);

  try {
    if (w1_cmd->parsed()) return run_w1(file_a, file_b, dump_plan, args);
    if (sim_cmd->parsed()) return run_simulate(args, zero_control);
    if (probe_cmd->parsed()) return run_probe(args);
    if (relax_cmd->parsed()) return run_relax(args, subdivisions, relax_steps);
    if (value_cmd->parsed()) return run_value(args, mode);
    if (opt_cmd->parsed()) return run_optimize(args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitValidation;
}
