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

// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.
// Every tolerance is pinned here, in code.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "wassflow/config.hpp"
#include "wassflow/io.hpp"
#include "wassflow/relaxation.hpp"

namespace fs = std::filesystem;
using namespace wassflow;
using wassflow::testing::random_measure;
using wassflow::testing::translation_system;

namespace {

int g_failed_criteria = 0;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

void run_criterion(int number, const std::string& name,
                   const std::function<void(Check&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  Check check;
  try {
    body(check);
  } catch (const std::exception& e) {
    check.ok = false;
    check.detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (check.ok) {
    std::printf("[PASS] criterion %2d: %s (%.1fs)\n", number, name.c_str(),
                seconds);
  } else {
    std::printf("[FAIL] criterion %2d: %s (%.1fs)\n       %s\n", number,
                name.c_str(), seconds, check.detail.c_str());
    ++g_failed_criteria;
  }
  std::fflush(stdout);
}

// ----- shared state across criteria -------------------------------------

struct OrdinaryRun {
  ControlSystem system;
  DiscreteMeasure mu0;
  TimeGrid grid;
  Vec aux0;
  TrajectoryBundle bundle;
};

struct RelaxedRun {
  ControlSystem system;
  DiscreteMeasure mu0;
  RelaxedControl control;
  TimeGrid grid;
  Vec aux0;
  TrajectoryBundle bundle;
};

std::vector<OrdinaryRun> g_ordinary_runs;  // bundles from criteria 2-7
std::vector<RelaxedRun> g_relaxed_runs;

void record(const ControlSystem& system, const DiscreteMeasure& mu0,
            const TimeGrid& grid, const Vec& aux0, TrajectoryBundle bundle) {
  g_ordinary_runs.push_back({system, mu0, grid, aux0, std::move(bundle)});
}

const std::string kConfigDir = WASSFLOW_CONFIG_DIR;
const std::string kCli = WASSFLOW_CLI_BIN;

EvacScenario load_shipped(const std::string& name, std::uint64_t seed) {
  return load_scenario(parse_config_file(kConfigDir + "/" + name), seed,
                       nullptr);
}

// Sublinearity constant of a finished run, computed with the probe operator
// applied at every grid node (final node under the last interval's control).
double trajectory_m_bar(const ControlSystem& system,
                        const TrajectoryBundle& bundle) {
  double m_bar = 0.0;
  for (int k = 0; k <= bundle.grid.steps; ++k) {
    const int interval = std::min(k, bundle.grid.steps - 1);
    const DiscreteMeasure mu = bundle.measure_at(k);
    const PointMap field =
        system.field(bundle.grid.time(k), mu, bundle.aux[k],
                     bundle.schedule.values[interval]);
    const HypothesisEstimates est =
        probe_sublinearity(field, mu, bundle.points[k]);
    m_bar = std::max(m_bar, est.m_hat);
  }
  return m_bar;
}

// ----- criteria ----------------------------------------------------------

void criterion_1(Check& check) {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform(0, 3));
    const int n = 2 + static_cast<int>(rng.uniform(0, 5));
    const DiscreteMeasure mu = random_measure(rng, d, n, 2.0);
    const DiscreteMeasure nu = random_measure(rng, d, n, 2.0);
    const double gap = std::abs(w1_value(mu, nu) - w1_oracle_uniform(mu, nu));
    check.require(gap <= 1e-9,
                  "oracle gap " + std::to_string(gap) + " at trial " +
                      std::to_string(trial));
    if (!check.ok) return;
  }
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform(0, 3));
    const DiscreteMeasure a = random_measure(rng, d, 5, 2.0, false);
    const DiscreteMeasure b = random_measure(rng, d, 4, 2.0, false);
    const DiscreteMeasure c = random_measure(rng, d, 6, 2.0, false);
    const double ab = w1_value(a, b), ba = w1_value(b, a);
    const double aa = w1_value(a, a);
    const double ac = w1_value(a, c), cb = w1_value(c, b);
    check.require(std::abs(ab - ba) <= 1e-9, "symmetry violated");
    check.require(aa <= 1e-9, "identity violated");
    check.require(ab <= ac + cb + 1e-9, "triangle violated");
    if (!check.ok) return;
  }
}

void criterion_2(Check& check) {
  Rng rng(102);
  const DiscreteMeasure mu0 = random_measure(rng, 2, 5, 1.0, false);
  Vec u(2);
  u << 0.6, -0.45;
  const TimeGrid grid{0.0, 1.0, 1000};  // dt = 1e-3
  const ControlSystem system = translation_system(2);
  TrajectoryBundle bundle =
      solve(system, mu0, ControlSchedule::constant(u, grid.steps), grid);
  const DiscreteMeasure muT = bundle.measure_at(grid.steps);
  const double to_translate = w1_value(muT, translate(mu0, u));
  const double to_start = w1_value(muT, mu0);
  check.require(to_translate <= 1e-9,
                "W1 to the translated cloud = " + std::to_string(to_translate));
  check.require(std::abs(to_start - u.norm()) <= 1e-9,
                "|W1 - |u|| = " + std::to_string(std::abs(to_start - u.norm())));
  record(system, mu0, grid, Vec(), std::move(bundle));
}

void criterion_3(Check& check) {
  Rng rng(103);
  const DiscreteMeasure mu0 = random_measure(rng, 2, 4, 1.0);
  const ControlSystem system = wassflow::testing::linear_system(2);
  std::vector<double> errors;
  for (const int steps : {100, 200, 400}) {  // dt = 1e-2, 5e-3, 2.5e-3
    const TimeGrid grid{0.0, 1.0, steps};
    TrajectoryBundle bundle =
        solve(system, mu0, ControlSchedule::zeros(0, steps), grid);
    double err = 0.0;
    for (int i = 0; i < mu0.size(); ++i) {
      err = std::max(err, (bundle.points[steps].col(i) -
                           std::exp(1.0) * mu0.points().col(i))
                              .norm());
    }
    errors.push_back(err);
    record(system, mu0, grid, Vec(), std::move(bundle));
  }
  check.require(errors[0] / errors[1] >= 8.0,
                "first halving gained only x" +
                    std::to_string(errors[0] / errors[1]));
  check.require(errors[1] / errors[2] >= 8.0,
                "second halving gained only x" +
                    std::to_string(errors[1] / errors[2]));
}

void criterion_4(Check& check) {
  const EvacScenario scenario = load_shipped("evac.toml", 0);
  const ControlSystem system = make_evac_system(scenario);
  const DiscreteMeasure mu0 = scenario.crowd0.measure();
  const Vec aux0 = scenario.leaders0.flatten();
  Rng rng(104);
  for (int run = 0; run < 20; ++run) {
    ControlSchedule raw;
    for (int k = 0; k < scenario.grid.steps; ++k) {
      raw.values.push_back(rng.uniform_vec(
          system.control_dim, -scenario.congestion.C, scenario.congestion.C));
    }
    TrajectoryBundle bundle =
        solve_projected(system, mu0, raw, scenario.grid, aux0);
    const double m_bar = trajectory_m_bar(system, bundle);
    const AprioriBounds bounds =
        gronwall_bounds(support_radius(mu0), m_bar, scenario.grid);
    const FamilyBoundsReport report =
        family_bounds_check({bundle}, bounds, 1e-6);
    check.require(report.ok,
                  "run " + std::to_string(run) + ": " +
                      (report.violations.empty() ? "?"
                                                 : report.violations.front()));
    if (!check.ok) return;
  }
}

void criterion_5(Check& check) {
  const EvacScenario scenario = load_shipped("evac.toml", 0);
  const ControlSystem system = make_evac_system(scenario);
  const DiscreteMeasure mu0 = scenario.crowd0.measure();
  const Vec aux0 = scenario.leaders0.flatten();

  // one shared library across refinements (the time window only depends on
  // the endpoints)
  std::vector<TrajectoryBundle> bundles;
  std::vector<int> steps_list = {100, 200, 400};  // dt = 1e-2, 5e-3, 2.5e-3
  double radius = 0.0;
  for (const int steps : steps_list) {
    const TimeGrid grid{scenario.grid.t0, scenario.grid.T, steps};
    bundles.push_back(solve(system, mu0,
                            ControlSchedule::zeros(system.control_dim, steps),
                            grid, aux0));
    for (const Mat& pts : bundles.back().points) {
      radius = std::max(radius,
                        pts.colwise().norm().maxCoeff());
    }
  }
  const std::vector<TestFunction> library = standard_test_functions(
      system.dim, 1.5 * radius + 1.0, TimeGrid{scenario.grid.t0,
                                               scenario.grid.T, 1});
  for (const TestFunction& phi : library) {
    std::vector<double> residuals;
    for (const TrajectoryBundle& bundle : bundles) {
      residuals.push_back(weak_form_residual(bundle, phi));
    }
    for (std::size_t i = 0; i + 1 < residuals.size(); ++i) {
      check.require(residuals[i + 1] <= residuals[i] / 2.0,
                    phi.name + ": residual(dt/2) = " +
                        std::to_string(residuals[i + 1]) + " vs residual(dt)/2 = " +
                        std::to_string(residuals[i] / 2.0));
    }
  }
}

void criterion_6(Check& check) {
  Rng rng(106);
  const double tol = 1e-9;

  // opposite-translation relaxed control
  {
    const ControlSystem system = translation_system(2);
    const DiscreteMeasure mu0 = random_measure(rng, 2, 4, 1.0);
    const TimeGrid grid{0.0, 1.0, 5};
    Vec up(2), down(2), half(2);
    up << 1.0, 0.0;
    down << -1.0, 0.0;
    half << 0.5, 0.5;
    const RelaxedControl balanced =
        RelaxedControl::constant_weights({up, down}, half, grid.steps);
    double previous = -1.0;
    for (const int n : {4, 8, 16, 32}) {
      const double gap = relaxation_gap(system, mu0, balanced, grid, n);
      if (previous >= 0.0) {
        check.require(gap < previous, "translation gap not strictly decreasing");
        check.require(gap <= 0.75 * previous + tol,
                      "translation gap ratio " + std::to_string(gap / previous));
      }
      previous = gap;
      // keep the chattering bundle for the round-trip criterion
      const TimeGrid fine = grid.refined(n);
      const ControlSchedule chat = chattering_schedule(balanced, grid, n,
                                                       ChatteringMode::kInterleaved);
      record(system, mu0, fine, Vec(), solve(system, mu0, chat, fine));
      g_relaxed_runs.push_back({system, mu0, refine_relaxed(balanced, n), fine,
                                Vec(),
                                solve_relaxed(system, mu0,
                                              refine_relaxed(balanced, n),
                                              fine)});
    }

    Vec sure(1);
    sure << 1.0;
    const RelaxedControl single =
        RelaxedControl::constant_weights({up}, sure, grid.steps);
    const double single_gap = relaxation_gap(system, mu0, single, grid, 8);
    check.require(single_gap <= tol,
                  "single-atom gap " + std::to_string(single_gap));
  }

  // evacuation relaxed control on the reduced scenario
  {
    const EvacScenario scenario = load_shipped("evac_small.toml", 0);
    const ControlSystem system = make_evac_system(scenario);
    const DiscreteMeasure mu0 = scenario.crowd0.measure();
    const Vec aux0 = scenario.leaders0.flatten();
    const TimeGrid grid{scenario.grid.t0, scenario.grid.T, 5};
    RelaxedControl relaxed = default_relaxed_control(scenario);
    relaxed.weights.assign(grid.steps, relaxed.weights[0]);
    double previous = -1.0;
    for (const int n : {4, 8, 16, 32}) {
      const double gap =
          relaxation_gap(system, mu0, relaxed, grid, n,
                         ChatteringMode::kInterleaved, aux0);
      if (previous >= 0.0) {
        check.require(gap < previous, "evac gap not strictly decreasing");
        check.require(gap <= 0.75 * previous + tol,
                      "evac gap ratio " + std::to_string(gap / previous));
      }
      previous = gap;
      const TimeGrid fine = grid.refined(n);
      const ControlSchedule chat = chattering_schedule(
          relaxed, grid, n, ChatteringMode::kInterleaved);
      record(system, mu0, fine, aux0, solve(system, mu0, chat, fine, aux0));
    }
  }
}

// the small translation instance shared with the value CLI demo
struct ValueInstance {
  MayerProblem problem;
  SearchSpec search;
};

ValueInstance value_instance() {
  Rng rng(107);
  Mat pts(2, 5);
  for (int i = 0; i < 5; ++i) pts.col(i) = rng.uniform_vec(2, -0.08, 0.08);
  ValueInstance inst;
  inst.problem.system = translation_system(2);
  inst.problem.grid = TimeGrid{0.0, 1.0, 4};
  inst.problem.mu0 = DiscreteMeasure::uniform(pts);
  inst.problem.position_dim = 2;
  inst.problem.cost = CostSpec::mollified(0.3);
  Vec center(2);
  center << 0.5, 0.0;
  inst.problem.target = RegionSpec::ball(center, 0.3);
  Vec up(2), down(2);
  up << 1.0, 0.0;
  down << -1.0, 0.0;
  inst.search.atoms = {up, down};
  inst.search.simplex_denominator = 4;
  return inst;
}

void criterion_7(Check& check) {
  const ValueInstance inst = value_instance();
  const ValueResult ordinary = value_function(
      inst.problem, 0.0, inst.problem.mu0, ValueMode::kOrdinary, inst.search);
  const ValueResult relaxed = value_function(
      inst.problem, 0.0, inst.problem.mu0, ValueMode::kRelaxed, inst.search);
  check.require(ordinary.candidates == 16, "expected 16 ordinary schedules");
  check.require(relaxed.value <= ordinary.value + 1e-9,
                "relaxed value above ordinary value");
  check.require(std::abs(ordinary.value - relaxed.value) <= 0.05,
                "value gap " +
                    std::to_string(std::abs(ordinary.value - relaxed.value)));

  // keep the two argmin trajectories for the round-trip criterion
  record(inst.problem.system, inst.problem.mu0, inst.problem.grid, Vec(),
         solve(inst.problem.system, inst.problem.mu0, ordinary.argmin_schedule,
               inst.problem.grid));
  g_relaxed_runs.push_back(
      {inst.problem.system, inst.problem.mu0, relaxed.argmin_relaxed,
       inst.problem.grid, Vec(),
       solve_relaxed(inst.problem.system, inst.problem.mu0,
                     relaxed.argmin_relaxed, inst.problem.grid)});
}

void criterion_8(Check& check) {
  check.require(!g_ordinary_runs.empty(), "no bundles were recorded");
  for (std::size_t i = 0; i < g_ordinary_runs.size(); ++i) {
    const OrdinaryRun& run = g_ordinary_runs[i];
    const ControlSchedule& selection = extract_selection(run.bundle);
    const RoundTripResult trip = verify_round_trip(
        run.system, run.mu0, selection, run.grid, run.bundle, run.aux0);
    check.require(trip.ok, "ordinary bundle " + std::to_string(i) +
                               " diverged at step " +
                               std::to_string(trip.first_divergent_step));
    if (!check.ok) return;
  }
  for (std::size_t i = 0; i < g_relaxed_runs.size(); ++i) {
    const RelaxedRun& run = g_relaxed_runs[i];
    const TrajectoryBundle redo =
        solve_relaxed(run.system, run.mu0, run.control, run.grid, run.aux0);
    for (int k = 0; k <= run.grid.steps; ++k) {
      if (!(redo.points[k].array() == run.bundle.points[k].array()).all()) {
        check.require(false, "relaxed bundle " + std::to_string(i) +
                                 " diverged at node " + std::to_string(k));
        return;
      }
    }
  }
}

void criterion_9(Check& check) {
  const EvacScenario scenario = load_shipped("evac.toml", 0);
  const MayerProblem problem = build_problem(scenario);
  const ControlSystem& system = problem.system;

  // zero-control baseline
  const TrajectoryBundle baseline =
      solve(system, problem.mu0,
            ControlSchedule::zeros(system.control_dim, problem.grid.steps),
            problem.grid, problem.aux0);
  const auto fraction = [&](const TrajectoryBundle& bundle) {
    return -evaluate_cost(
        CostSpec::indicator(),
        project_positions(bundle.measure_at(problem.grid.steps),
                          problem.position_dim),
        problem.target);
  };
  const double baseline_fraction = fraction(baseline);

  OptimizerOptions options = scenario.optimizer;
  const Vec aim = aim_control(scenario, 0.6 * scenario.congestion.C);
  Vec warm(options.control_knots * system.control_dim);
  for (int j = 0; j < options.control_knots; ++j) {
    warm.segment(j * system.control_dim, system.control_dim) = aim;
  }
  options.warm_starts = {warm};

  const SolveReport report = solve_mayer(problem, options);
  const AdmissibilityReport admissible =
      check_admissibility(report.best_bundle, problem);
  check.require(admissible.admissible, "best trajectory is not admissible");
  check.require(admissible.max_lambda <= 1e-6,
                "max lambda " + std::to_string(admissible.max_lambda));
  check.require(admissible.control_violations.empty(),
                "controls exceed the congestion bounds");

  const double best_fraction = fraction(report.best_bundle);
  check.require(best_fraction >= baseline_fraction,
                "fraction " + std::to_string(best_fraction) +
                    " below baseline " + std::to_string(baseline_fraction));
  check.require(best_fraction > baseline_fraction,
                "no strict improvement over the baseline (" +
                    std::to_string(best_fraction) + ")");
}

// ----- criterion 10: byte-identical CLI reruns ---------------------------

int run_cli(const std::string& tail) {
  const std::string cmd = kCli + " " + tail + " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> contents;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    contents[entry.path().filename().string()] = buffer.str();
  }
  return contents;
}

void criterion_10(Check& check) {
  const std::string small = kConfigDir + "/evac_small.toml";
  const std::vector<std::pair<std::string, std::string>> invocations = {
      {"w1", "w1 " + kConfigDir + "/dirac_a.csv " + kConfigDir +
                 "/dirac_b.csv --plan"},
      {"simulate", "simulate --config " + small + " --seed 3"},
      {"probe", "probe --config " + small + " --seed 3"},
      {"relax", "relax --config " + small + " --subdivisions 2,4 --relax-steps 5"},
      {"value", "value --config " + kConfigDir + "/value_small.toml"},
      {"optimize", "optimize --config " + small + " --seed 0"},
  };
  for (const auto& [name, tail] : invocations) {
    const fs::path dir_a = fs::path("acceptance_out") / (name + "_a");
    const fs::path dir_b = fs::path("acceptance_out") / (name + "_b");
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    fs::create_directories(dir_a);
    fs::create_directories(dir_b);
    const int code_a = run_cli(tail + " --out " + dir_a.string());
    const int code_b = run_cli(tail + " --out " + dir_b.string());
    check.require(code_a == 0 && code_a == code_b,
                  name + ": exit codes " + std::to_string(code_a) + "/" +
                      std::to_string(code_b));
    const auto bytes_a = dir_bytes(dir_a);
    const auto bytes_b = dir_bytes(dir_b);
    check.require(bytes_a.size() == bytes_b.size() && !bytes_a.empty(),
                  name + ": artifact lists differ");
    for (const auto& [file, data] : bytes_a) {
      check.require(bytes_b.count(file) == 1 && bytes_b.at(file) == data,
                    name + ": " + file + " differs between reruns");
    }
    if (!check.ok) return;
  }
}

}  // namespace

int main() {
  std::printf("wassflow acceptance suite\n");
  run_criterion(1, "W1 oracle equivalence and metric axioms", criterion_1);
  run_criterion(2, "translation exactness at dt = 1e-3", criterion_2);
  run_criterion(3, "RK4 integrator order on the linear field", criterion_3);
  run_criterion(4, "Gronwall envelopes on 20 random evacuation runs",
                criterion_4);
  run_criterion(5, "weak-form residual halves under dt refinement",
                criterion_5);
  run_criterion(6, "relaxation gap decay under subdivision", criterion_6);
  run_criterion(7, "ordinary vs relaxed value functions", criterion_7);
  run_criterion(8, "bit-exact round trips for the recorded bundles",
                criterion_8);
  run_criterion(9, "evacuation end-to-end beats the zero-control baseline",
                criterion_9);
  run_criterion(10, "byte-identical CLI reruns", criterion_10);

  if (g_failed_criteria > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failed_criteria);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
