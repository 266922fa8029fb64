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

#include <optional>
#include <variant>

#include "wassflow/kernels.hpp"
#include "wassflow/trajectory.hpp"

namespace wassflow {

/// Closed region in R^d given as a union of primitive shapes, with an exact
/// Euclidean distance function (zero inside).
struct RegionSpec {
  struct Ball {
    Vec center;
    double radius = 0.0;
  };
  struct Box {
    Vec low, high;
  };
  struct HalfSpace {
    Vec normal;       // need not be unit
    double offset = 0.0;  // region is {x : normal . x <= offset}
  };
  using Part = std::variant<Ball, Box, HalfSpace>;
  std::vector<Part> parts;

  static RegionSpec ball(Vec center, double radius);
  static RegionSpec box(Vec low, Vec high);
  static RegionSpec half_space(Vec normal, double offset);
  RegionSpec unite(const RegionSpec& other) const;

  void validate(int dim) const;
  double distance(const Vec& x) const;
  bool contains(const Vec& x, double tol = 0.0) const {
    return distance(x) <= tol;
  }
};

/// Terminal cost functional. The indicator kind is the negated fraction of
/// mass inside the target; the mollified kind ramps the indicator linearly
/// to zero at distance eps, which is W1-continuous and converges to the
/// indicator cost as eps -> 0.
struct CostSpec {
  enum class Kind { kIndicatorFraction, kMollifiedIndicator, kCustom };
  Kind kind = Kind::kIndicatorFraction;
  double eps = 0.0;  // ramp width for kMollifiedIndicator
  std::function<double(const DiscreteMeasure&)> custom;

  static CostSpec indicator() { return {Kind::kIndicatorFraction, 0.0, {}}; }
  static CostSpec mollified(double eps);
  static CostSpec custom_cost(std::function<double(const DiscreteMeasure&)> f);
};

/// Running-constraint functional: Lambda(mu) = sum_i w_i dist(x_i, H),
/// zero exactly when the support lies in H. `mu` holds the position block.
double lambda_constraint(const DiscreteMeasure& mu, const RegionSpec& safe);

/// Evaluates the terminal cost on the position-block measure against the
/// target region.
double evaluate_cost(const CostSpec& cost, const DiscreteMeasure& muT,
                     const RegionSpec& target);

/// The Mayer problem data: terminal cost, controlled dynamics, running
/// safety constraint on the position marginal, and an optional terminal set.
struct MayerProblem {
  ControlSystem system;
  TimeGrid grid;
  DiscreteMeasure mu0;
  Vec aux0;
  int position_dim = 0;  // spatial block used by cost and constraints
  CostSpec cost;
  RegionSpec target;                 // S
  std::optional<RegionSpec> safe;    // H; absent => unconstrained running
  std::optional<RegionSpec> terminal;  // Q_T
  double running_tol = 1e-6;
  HypothesisEstimates probes;  // attached by scenario builders

  void validate() const;
  /// Terminal cost of a bundle (position marginal of the final measure).
  double terminal_cost(const TrajectoryBundle& bundle) const;
};

struct OptimizerOptions {
  int starts = 8;
  int max_evals_per_start = 120;
  int control_knots = 4;      // piecewise-constant decision blocks
  double penalty_run = 100.0;
  double penalty_terminal = 100.0;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Optional deterministic initial guesses, used as starts 1.. before the
  /// seeded random ones (start 0 is always the zero control).
  std::vector<Vec> warm_starts;
};

/// Outcome of one optimization run. The trace is the best-so-far penalized
/// objective after each evaluation, nonincreasing by construction; the
/// numerical minimizing sequence of the direct method.
struct SolveReport {
  ControlSchedule best_schedule;  // admissible by per-interval projection
  TrajectoryBundle best_bundle;
  double cost = 0.0;             // raw terminal cost
  double max_lambda = 0.0;       // max over grid nodes
  double terminal_distance = 0.0;
  bool feasible = false;
  std::vector<double> trace;
  std::uint64_t seed = 0;
  long evaluations = 0;
  int best_start = -1;
};

/// Direct-method solver: multi-start Nelder-Mead over piecewise-constant
/// control knots with box projection, state-dependent control bounds
/// enforced by per-interval projection at the left endpoint, and exact
/// penalties for the running/terminal constraints. Candidates are ranked
/// feasible-first, then by cost, then by start index. Start 0 is the zero
/// control, so the report is never worse than the zero-control baseline
/// whenever that baseline is feasible.
SolveReport solve_mayer(const MayerProblem& problem,
                        const OptimizerOptions& options);

struct AdmissibilityReport {
  std::vector<double> lambda;      // per grid node
  double max_lambda = 0.0;
  bool terminal_ok = true;
  double terminal_distance = 0.0;
  std::vector<int> control_violations;  // interval indices
  bool admissible = false;
};

/// Per-node running-constraint values, terminal membership and per-interval
/// control-bound satisfaction (left-endpoint semantics) with tolerance
/// problem.running_tol.
AdmissibilityReport check_admissibility(const TrajectoryBundle& bundle,
                                        const MayerProblem& problem);

}  // namespace wassflow
