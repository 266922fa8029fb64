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

#include "wassflow/types.hpp"

namespace wassflow {

/// Tolerance on the total mass at construction. Constructors never
/// renormalize silently; use DiscreteMeasure::renormalized for that.
inline constexpr double kWeightSumTol = 1e-12;

/// A compactly supported probability measure given as a weighted point cloud:
/// column i of points() is an atom in R^d carrying weights()[i] > 0. Values
/// are immutable after construction. Coincident atoms are allowed and never
/// merged, so atom indices and the weight multiset are stable identifiers.
class DiscreteMeasure {
 public:
  /// Dirac at the origin of R^1; a valid placeholder for deferred assignment.
  DiscreteMeasure() : points_(Mat::Zero(1, 1)), weights_(Vec::Ones(1)) {}

  /// points: d x n (one atom per column), weights: n positive entries
  /// summing to 1 within kWeightSumTol.
  DiscreteMeasure(Mat points, Vec weights);

  static DiscreteMeasure dirac(const Vec& x);
  static DiscreteMeasure uniform(Mat points);
  /// Scales the given weights to total mass one, then constructs.
  static DiscreteMeasure renormalized(Mat points, Vec weights);

  int dim() const { return static_cast<int>(points_.rows()); }
  int size() const { return static_cast<int>(points_.cols()); }
  const Mat& points() const { return points_; }
  const Vec& weights() const { return weights_; }

 private:
  Mat points_;
  Vec weights_;
};

/// First absolute moment: sum_i w_i |x_i|.
double momentum(const DiscreteMeasure& mu);

/// Radius of the smallest origin-centred ball containing the support.
double support_radius(const DiscreteMeasure& mu);

/// Image measure under a point map: atoms mapped, weights untouched.
/// Coincident images are kept as distinct atoms.
DiscreteMeasure pushforward(const DiscreteMeasure& mu,
                            const std::function<Vec(const Vec&)>& f);

DiscreteMeasure translate(const DiscreteMeasure& mu, const Vec& shift);

/// sum_i w_i f(x_i).
double integrate(const DiscreteMeasure& mu,
                 const std::function<double(const Vec&)>& f);

/// A measure on phase space R^{2d} with the first d coordinates read as
/// position and the last d as velocity.
class PhaseMeasure {
 public:
  /// Dirac at the origin of R^2 (position and velocity both scalar zero).
  PhaseMeasure() : measure_(Mat::Zero(2, 1), Vec::Ones(1)) {}

  explicit PhaseMeasure(DiscreteMeasure m);

  const DiscreteMeasure& measure() const { return measure_; }
  int space_dim() const { return measure_.dim() / 2; }
  int size() const { return measure_.size(); }

  Mat positions() const {
    return measure_.points().topRows(space_dim());
  }
  Mat velocities() const {
    return measure_.points().bottomRows(space_dim());
  }
  /// Marginal on the position block (weights unchanged).
  DiscreteMeasure position_marginal() const {
    return DiscreteMeasure(positions(), measure_.weights());
  }

 private:
  DiscreteMeasure measure_;
};

/// Marginal on the first `position_dim` coordinates; identity when
/// position_dim equals the ambient dimension.
DiscreteMeasure project_positions(const DiscreteMeasure& mu, int position_dim);

}  // namespace wassflow
