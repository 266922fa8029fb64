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

// Shared helpers for the test binaries. Oracles here must stay independent
// of the implementation paths they check.

#pragma once

#include "wassflow/system.hpp"
#include "wassflow/types.hpp"

#include <cmath>

namespace wassflow::testing {

inline DiscreteMeasure random_measure(Rng& rng, int dim, int atoms,
                                      double radius = 1.0,
                                      bool uniform_weights = true) {
  Mat points(dim, atoms);
  for (int i = 0; i < atoms; ++i) {
    points.col(i) = rng.uniform_vec(dim, -radius, radius);
  }
  if (uniform_weights) return DiscreteMeasure::uniform(std::move(points));
  Vec weights(atoms);
  for (int i = 0; i < atoms; ++i) weights[i] = rng.uniform(0.1, 1.0);
  return DiscreteMeasure::renormalized(std::move(points), std::move(weights));
}

/// v(t, mu, u)(x) = u: pure translation under the control.
inline ControlSystem translation_system(int dim, double control_bound = 10.0) {
  ControlSystem system;
  system.dim = dim;
  system.control_dim = dim;
  system.field = [](double, const DiscreteMeasure&, const Vec&,
                    const Vec& u) -> PointMap {
    return [u](const Vec&) { return u; };
  };
  system.control_set = [dim, control_bound](double, const DiscreteMeasure&,
                                            const Vec&) {
    return ControlSetSpec::box(Vec::Constant(dim, control_bound));
  };
  return system;
}

/// Uncontrolled linear field v(x) = x (exponential characteristics).
inline ControlSystem linear_system(int dim) {
  ControlSystem system;
  system.dim = dim;
  system.control_dim = 0;
  system.field = [](double, const DiscreteMeasure&, const Vec&,
                    const Vec&) -> PointMap {
    return [](const Vec& x) { return x; };
  };
  return system;
}

/// Largest singular value by power iteration on A^T A; independent of any
/// library decomposition.
inline double power_iteration_sigma_max(const Mat& A, int iters = 200) {
  Vec v = Vec::Ones(A.cols());
  v /= v.norm();
  for (int i = 0; i < iters; ++i) {
    v = A.transpose() * (A * v);
    v /= v.norm();
  }
  return std::sqrt(v.dot(A.transpose() * (A * v)));
}

}  // namespace wassflow::testing
