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
#include <string>
#include <vector>

#include "wassflow/system.hpp"

namespace wassflow {

/// A measure curve on a time grid together with the selection that generated
/// it: the discrete form of a trajectory-selection pair. Atoms and weights
/// are constant in time (the continuity equation is solved along particle
/// characteristics), and points[0] is the prescribed initial cloud verbatim.
struct TrajectoryBundle {
  TimeGrid grid;
  Vec weights;
  std::vector<Mat> points;  // steps+1 ensembles, dim x n each
  std::vector<Vec> aux;     // steps+1 auxiliary states (size 0 when unused)

  // Field snapshots at the atoms: vel_left[k] is the velocity at the atoms
  // of node k under the interval-k control; vel_right[k] the same field one
  // node later. Used by the weak-form quadrature and the hypothesis probes.
  std::vector<Mat> vel_left;
  std::vector<Mat> vel_right;

  ControlSchedule schedule;                        // ordinary selection
  std::optional<RelaxedControl> relaxed_selection; // set by solve_relaxed
  std::vector<int> flagged_steps;  // controls found inadmissible a posteriori

  int atom_count() const { return static_cast<int>(weights.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].rows()); }
  DiscreteMeasure measure_at(int k) const {
    return DiscreteMeasure(points.at(k), weights);
  }
};

/// Integrates the controlled non-local continuity equation along particle
/// characteristics with classical RK4; the whole ensemble (atoms plus
/// auxiliary state) advances together through each sub-stage. Weights never
/// change. Controls are checked against the admissible set at the left
/// endpoint of their interval; violations are flagged in the bundle, not
/// fatal. A non-finite field value raises SolverError naming time and atom.
TrajectoryBundle solve(const ControlSystem& system, const DiscreteMeasure& mu0,
                       const ControlSchedule& schedule, const TimeGrid& grid,
                       const Vec& aux0 = Vec());

/// As solve(), but each interval's control is first projected onto the
/// admissible set computed at the left endpoint state. The bundle stores the
/// projected schedule, so re-solving with it reproduces the run bit-exactly.
TrajectoryBundle solve_projected(const ControlSystem& system,
                                 const DiscreteMeasure& mu0,
                                 const ControlSchedule& raw_schedule,
                                 const TimeGrid& grid, const Vec& aux0 = Vec());

/// Support/modulus envelopes from the sublinear growth bound
/// |v| <= m_bar (1 + |x| + M1(mu)): the radius envelope solves
/// rho' = m_bar (1 + 2 rho) from rho(t0) = r, giving
/// R_r = ((1 + 2r) e^{2 m_bar (T - t0)} - 1) / 2 and the constant modulus
/// m_r = m_bar (1 + 2 R_r).
struct AprioriBounds {
  double radius = 0.0;   // R_r
  double modulus = 0.0;  // m_r
};
AprioriBounds gronwall_bounds(double r, double m_bar, const TimeGrid& grid);

/// A smooth test function phi(t, x) with analytic time derivative and
/// spatial gradient.
struct TestFunction {
  std::string name;
  std::function<double(double, const Vec&)> value;
  std::function<double(double, const Vec&)> dt;
  std::function<Vec(double, const Vec&)> grad;
};

/// Smooth bump supported on |x| < radius (value, gradient); identically zero
/// outside.
TestFunction test_function_space_bump(int dim, double radius);
/// (s . x) times the spatial bump for a fixed unit direction s.
TestFunction test_function_linear_bump(int dim, double radius);
/// Bump in time (vanishing at both grid endpoints) times a spatial bump.
TestFunction test_function_time_bump(int dim, double radius,
                                     const TimeGrid& grid);

/// The shipped test-function library: time-bump multiples of
/// {1, s.x, |x|^2} times a spatial bump covering the given radius. All
/// members vanish at t0 and T, so the distributional weak form applies as
/// stated.
std::vector<TestFunction> standard_test_functions(int dim, double radius,
                                                  const TimeGrid& grid);

/// Weak-form defect of a bundle against one test function: the trapezoidal
/// time quadrature of int (d_t phi + <grad phi, v>) d mu(t) dt minus the
/// endpoint correction int phi d mu(T) - int phi d mu(t0). For test
/// functions vanishing at t0 and T the correction is zero and this is the
/// distributional residual itself.
double weak_form_residual(const TrajectoryBundle& bundle,
                          const TestFunction& phi);

/// The stored selection of an ordinary bundle.
const ControlSchedule& extract_selection(const TrajectoryBundle& bundle);

struct RoundTripResult {
  bool ok = false;
  int first_divergent_step = -1;  // -1 when ok
};

/// Re-solves from the extracted selection and compares every node of the
/// measure (and auxiliary) trajectory for exact equality.
RoundTripResult verify_round_trip(const ControlSystem& system,
                                  const DiscreteMeasure& mu0,
                                  const ControlSchedule& schedule,
                                  const TimeGrid& grid,
                                  const TrajectoryBundle& expected,
                                  const Vec& aux0 = Vec());

/// Uniform-support and W1-equicontinuity checks over a family of bundles:
/// support_radius(mu(t)) <= R_r and W1(mu(t), mu(s)) <= m_r (t-s) + tol for
/// every bundle and grid pair s <= t. Small ensembles use the exact W1; for
/// more than `exact_w1_max_atoms` atoms the particle-identity coupling is
/// used, which upper-bounds W1 and keeps the check sound.
struct FamilyBoundsReport {
  bool ok = true;
  std::vector<std::string> violations;
  double max_support_radius = 0.0;
  double max_rate = 0.0;  // largest observed W1(t,s)/(t-s)
};
FamilyBoundsReport family_bounds_check(
    const std::vector<TrajectoryBundle>& bundles, const AprioriBounds& bounds,
    double tol = 1e-6, int exact_w1_max_atoms = 16);

}  // namespace wassflow
