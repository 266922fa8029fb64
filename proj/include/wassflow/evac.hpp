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

namespace wassflow {

/// Double-integrator leader particles: positions y_i and velocities w_i in
/// R^d, controlled through their accelerations. As a measure, the leaders
/// are the uniform empirical measure on the (y_i, w_i).
struct LeaderState {
  Mat positions;   // d x M
  Mat velocities;  // d x M

  int count() const { return static_cast<int>(positions.cols()); }
  int space_dim() const { return static_cast<int>(positions.rows()); }
  void validate() const;

  /// Auxiliary-state layout: [vec(positions); vec(velocities)].
  Vec flatten() const;
  static LeaderState unflatten(const Vec& aux, int d, int M);
  /// The empirical phase measure (1/M) sum delta_{(y_i, w_i)}.
  PhaseMeasure empirical() const;
};

/// Soft-congestion control bound |u_i| <= C (1 - eta (rho * mu)(y_i)).
struct CongestionParams {
  double C = 5.0;
  double eta = 0.5;
  void validate() const;
};

/// Per-leader acceleration bound C (1 - eta (rho * mu)(y)), clamped at zero:
/// concentrated discrete crowds can push the local density above 1/eta, and
/// a negative norm bound is meaningless.
double congestion_bound(const PhaseMeasure& mu, const Vec& y,
                        const CongestionParams& p, const Mollifier& rho);

/// The crowd's non-local phase-space field: position block moves with the
/// velocity coordinate; the velocity block is the Morse self-interaction
/// convolved over the crowd plus the Cucker-Smale alignment convolved over
/// the leader empirical measure. The returned map snapshots the inputs.
PointMap crowd_field(const PhaseMeasure& mu, const LeaderState& leaders,
                     const KernelParams& kernels);

/// Leader dynamics dy_i = w_i, dw_i = u_i; u is the stacked control
/// [u_1; ...; u_M].
LeaderState leader_field(const Vec& u, const LeaderState& leaders);

/// The full evacuation scenario of the leader-follower Mayer problem.
struct EvacScenario {
  PhaseMeasure crowd0;
  LeaderState leaders0;
  KernelParams kernels;
  CongestionParams congestion;
  RegionSpec target;  // S
  RegionSpec safe;    // H
  TimeGrid grid;
  CostSpec cost = CostSpec::indicator();
  OptimizerOptions optimizer;

  void validate() const;
};

/// The coupled crowd+leader control system (crowd atoms and leader state
/// advance under one RK4 step; the control set is the state-dependent
/// congestion ball).
ControlSystem make_evac_system(const EvacScenario& scenario);

/// Assembles the Mayer problem: indicator (or configured) terminal cost over
/// the target, running constraint on the crowd's position marginal,
/// congestion control bounds, plus empirical hypothesis probes attached to
/// the problem. Throws if the initial crowd already violates the running
/// constraint.
MayerProblem build_problem(const EvacScenario& scenario);

/// A deterministic relaxed control for gap experiments: one atom steering
/// every leader toward the target at half the congestion budget, one idle
/// atom, with constant weights (1/3, 2/3).
RelaxedControl default_relaxed_control(const EvacScenario& scenario);

/// Constant per-leader acceleration aimed at the target, used as a warm
/// start and as the steering atom of default_relaxed_control.
Vec aim_control(const EvacScenario& scenario, double magnitude);

}  // namespace wassflow
