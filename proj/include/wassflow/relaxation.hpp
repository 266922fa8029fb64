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

#include "wassflow/mayer.hpp"
#include "wassflow/trajectory.hpp"

namespace wassflow {

/// Integrates the convexified inclusion: on interval k the driving field is
/// sum_k lambda_k(t_i) v(t, mu, u_k). Zero-weight atoms are skipped, so a
/// vertex weight vector reproduces the ordinary solve bit-exactly.
TrajectoryBundle solve_relaxed(const ControlSystem& system,
                               const DiscreteMeasure& mu0,
                               const RelaxedControl& relaxed,
                               const TimeGrid& grid, const Vec& aux0 = Vec());

/// How chattering distributes atom occupation inside one coarse interval.
/// kBlocks follows the construction as one contiguous block per atom in
/// index order (largest-remainder lengths); its within-interval excursion is
/// O(coarse dt) independent of the subdivision. kInterleaved dithers the
/// atoms across sub-intervals (largest-deficit rule), making the excursion
/// O(dt / subdivision), which is the rate the gap experiments measure.
enum class ChatteringMode { kInterleaved, kBlocks };

/// Realizes a relaxed control as an ordinary schedule on the grid refined by
/// `subdivision`: per coarse interval each atom occupies sub-intervals whose
/// count is its weight share of the subdivision (exact total by
/// largest-remainder rounding, index-order ties).
ControlSchedule chattering_schedule(
    const RelaxedControl& relaxed, const TimeGrid& grid, int subdivision,
    ChatteringMode mode = ChatteringMode::kBlocks);

/// Expands per-coarse-interval weights onto the refined grid.
RelaxedControl refine_relaxed(const RelaxedControl& relaxed, int subdivision);

/// Solves the relaxed and the chattering trajectories on the refined grid
/// and returns the maximum over refined grid nodes of the exact W1 distance
/// between them.
double relaxation_gap(const ControlSystem& system, const DiscreteMeasure& mu0,
                      const RelaxedControl& relaxed, const TimeGrid& grid,
                      int subdivision,
                      ChatteringMode mode = ChatteringMode::kInterleaved,
                      const Vec& aux0 = Vec());

/// Finite search space for the value functions: ordinary mode enumerates all
/// atom choices per interval; relaxed mode enumerates per-interval weight
/// vectors on the simplex grid with the given denominator.
struct SearchSpec {
  std::vector<Vec> atoms;
  int simplex_denominator = 4;
  long max_candidates = 2000000;
};

enum class ValueMode { kOrdinary, kRelaxed };

struct ValueResult {
  double value = 0.0;
  ControlSchedule argmin_schedule;          // ordinary mode
  RelaxedControl argmin_relaxed;            // relaxed mode
  long candidates = 0;
};

/// Exhaustive minimum of the terminal cost over the declared search space,
/// starting from (tau, mu_tau); tau must be a grid node. Constraints do not
/// enter: these are the plain inclusion value functions.
ValueResult value_function(const MayerProblem& problem, double tau,
                           const DiscreteMeasure& mu_tau, ValueMode mode,
                           const SearchSpec& search, const Vec& aux_tau = Vec());

}  // namespace wassflow
