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

#include "wassflow/measure.hpp"

namespace wassflow {

/// Marginal tolerance for transport plans.
inline constexpr double kPlanMarginalTol = 1e-10;

/// Sparse coupling between two discrete measures. Entries carry positive
/// mass; row sums match the source weights and column sums the target
/// weights within kPlanMarginalTol.
struct TransportPlan {
  struct Entry {
    int i;        // source atom
    int j;        // target atom
    double mass;  // > 0
  };
  std::vector<Entry> entries;

  Vec row_sums(int n) const;
  Vec col_sums(int m) const;
  /// sum over entries of mass * |x_i - y_j|.
  double cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const;
  bool feasible(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                double tol = kPlanMarginalTol) const;
};

struct W1Result {
  double value = 0.0;
  TransportPlan plan;
};

/// Exact W1 distance between discrete measures, solved as the dense
/// transportation linear program with Euclidean ground cost. Returns the
/// optimal value together with one optimal plan (ties among optimal plans
/// are broken by pivoting order; only the value is contract-stable).
W1Result w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

inline double w1_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return w1(mu, nu).value;
}

/// Brute-force W1 for uniform measures with equal atom counts n <= 8:
/// for uniform marginals an optimal plan sits at a permutation vertex, so the
/// exact value is the minimum over all n! assignments. Test oracle.
double w1_oracle_uniform(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// One row of the narrow-convergence probe: the W1 distance to the limit, the
/// integration gap for each supplied bounded continuous test function, and
/// the momentum gap.
struct NarrowProbeRow {
  double w1_to_limit = 0.0;
  std::vector<double> testfn_gap;
  double momentum_gap = 0.0;
};

/// Computes, for each member of the sequence, the three quantities whose
/// joint convergence to zero is equivalent to W1 convergence.
std::vector<NarrowProbeRow> metrizes_narrow_probe(
    const std::vector<DiscreteMeasure>& seq, const DiscreteMeasure& limit,
    const std::vector<std::function<double(const Vec&)>>& testfns);

}  // namespace wassflow
