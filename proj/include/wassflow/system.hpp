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

#include <functional>
#include <vector>

#include "wassflow/kernels.hpp"
#include "wassflow/measure.hpp"

namespace wassflow {

/// Uniform grid of `steps` intervals on [t0, T].
struct TimeGrid {
  double t0 = 0.0;
  double T = 1.0;
  int steps = 1;

  void validate() const {
    if (!(t0 < T)) throw std::invalid_argument("time grid needs t0 < T");
    if (steps < 1) throw std::invalid_argument("time grid needs steps >= 1");
  }
  double dt() const { return (T - t0) / steps; }
  /// Node k computed directly from the endpoints, exact at k = 0 and steps.
  double time(int k) const {
    return t0 + (T - t0) * (static_cast<double>(k) / steps);
  }
  TimeGrid refined(int factor) const { return {t0, T, steps * factor}; }
};

/// A compact admissible control set: either a finite list of atoms, a
/// componentwise box |u_i| <= b_i, or per-block Euclidean norm balls
/// (one bound per block of `block_size` components).
struct ControlSetSpec {
  enum class Kind { kAtoms, kBox, kBlockNormBall };

  Kind kind = Kind::kBox;
  std::vector<Vec> atoms;  // kAtoms
  Vec box_bounds;          // kBox: |u_i| <= box_bounds[i]
  Vec block_bounds;        // kBlockNormBall: |u block i|_2 <= block_bounds[i]
  int block_size = 0;

  static ControlSetSpec finite(std::vector<Vec> atom_list);
  static ControlSetSpec box(Vec bounds);
  static ControlSetSpec block_norm_ball(Vec bounds, int block_size);

  void validate() const;
  int dim() const;
  bool contains(const Vec& u, double tol) const;
  /// Metric projection for box/ball kinds; nearest atom for kAtoms.
  Vec project(const Vec& u) const;
};

/// Piecewise-constant control: one value per grid interval. The discrete
/// analogue of a measurable selection.
struct ControlSchedule {
  std::vector<Vec> values;

  static ControlSchedule constant(const Vec& u, int steps) {
    return {std::vector<Vec>(steps, u)};
  }
  static ControlSchedule zeros(int control_dim, int steps) {
    return constant(Vec::Zero(control_dim), steps);
  }
  int steps() const { return static_cast<int>(values.size()); }
};

/// Element of the convexified dynamics over a finite family of control
/// atoms: per-interval convex weights over the (time-constant) atoms.
struct RelaxedControl {
  std::vector<Vec> atoms;    // K control values
  std::vector<Vec> weights;  // one simplex vector of length K per interval

  static RelaxedControl constant_weights(std::vector<Vec> atom_list,
                                         const Vec& lambda, int steps);
  void validate() const;
  int atom_count() const { return static_cast<int>(atoms.size()); }
  int steps() const { return static_cast<int>(weights.size()); }
};

/// Controlled non-local dynamics: a velocity rule producing a pointwise map
/// from (t, mu, aux, u), an optional auxiliary finite-dimensional state with
/// its own right-hand side (used for leader particles), and a rule giving
/// the admissible control set at each state.
struct ControlSystem {
  int dim = 0;          // ambient dimension of the measure
  int control_dim = 0;  // 0 for uncontrolled systems
  int aux_dim = 0;      // 0 when there is no auxiliary state

  std::function<PointMap(double t, const DiscreteMeasure& mu, const Vec& aux,
                         const Vec& u)>
      field;
  std::function<Vec(double t, const DiscreteMeasure& mu, const Vec& aux,
                    const Vec& u)>
      aux_field;  // may be empty when aux_dim == 0
  std::function<ControlSetSpec(double t, const DiscreteMeasure& mu,
                               const Vec& aux)>
      control_set;  // may be empty (unconstrained)

  void validate() const {
    if (dim < 1) throw std::invalid_argument("system needs dim >= 1");
    if (!field) throw std::invalid_argument("system needs a velocity rule");
    if (aux_dim > 0 && !aux_field) {
      throw std::invalid_argument("system with aux state needs aux_field");
    }
  }
};

}  // namespace wassflow
