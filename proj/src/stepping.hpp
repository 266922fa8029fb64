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

// Internal stepping core shared by the ordinary, projected and relaxed
// solvers. Keeping one arithmetic path is what makes round trips bit-exact.

#pragma once

#include <functional>

#include "wassflow/trajectory.hpp"

namespace wassflow::detail {

struct StateDerivative {
  Mat dpoints;
  Vec daux;
};

using IntervalField =
    std::function<StateDerivative(double t, const Mat& pts, const Vec& aux)>;

/// Field of the ordinary dynamics under one fixed control value.
IntervalField make_interval_field(const ControlSystem& system,
                                  const Vec& weights, const Vec& u);

/// Convex combination of the atom fields with the given weights; zero-weight
/// atoms are skipped, and a single unit weight falls through to the ordinary
/// field so vertex relaxed controls reproduce ordinary solves exactly.
IntervalField make_relaxed_interval_field(const ControlSystem& system,
                                          const Vec& weights,
                                          const std::vector<Vec>& atoms,
                                          const Vec& lambda);

void check_finite(const StateDerivative& d, double t);

void rk4_step(const IntervalField& f, double t, double h, Mat& pts, Vec& aux,
              StateDerivative& k1_out);

/// Runs the grid loop and fills states and field snapshots; the caller
/// supplies the per-interval field and owns schedule bookkeeping.
TrajectoryBundle integrate_core(
    const TimeGrid& grid, const DiscreteMeasure& mu0, const Vec& aux0,
    const std::function<IntervalField(int)>& field_at);

}  // namespace wassflow::detail
