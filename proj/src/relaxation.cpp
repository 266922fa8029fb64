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

#include "wassflow/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stepping.hpp"
#include "wassflow/transport.hpp"

namespace wassflow {

TrajectoryBundle solve_relaxed(const ControlSystem& system,
                               const DiscreteMeasure& mu0,
                               const RelaxedControl& relaxed,
                               const TimeGrid& grid, const Vec& aux0) {
  system.validate();
  grid.validate();
  relaxed.validate();
  if (relaxed.steps() != grid.steps) {
    throw std::invalid_argument("relaxed control length does not match grid");
  }
  for (const auto& atom : relaxed.atoms) {
    if (static_cast<int>(atom.size()) != system.control_dim) {
      throw std::invalid_argument("relaxed atom dimension mismatch");
    }
  }
  if (static_cast<int>(aux0.size()) != system.aux_dim) {
    throw std::invalid_argument("auxiliary state dimension mismatch");
  }
  const Vec weights = mu0.weights();
  TrajectoryBundle bundle = detail::integrate_core(
      grid, mu0, aux0, [&](int k) {
        return detail::make_relaxed_interval_field(system, weights,
                                                   relaxed.atoms,
                                                   relaxed.weights[k]);
      });
  bundle.relaxed_selection = relaxed;
  return bundle;
}

namespace {

// Sub-interval occupation counts per atom: largest-remainder rounding of
// lambda_k * N, ties by atom index.
std::vector<int> occupation_counts(const Vec& lambda, int subdivision) {
  const int K = static_cast<int>(lambda.size());
  std::vector<int> counts(K);
  std::vector<double> remainder(K);
  int assigned = 0;
  for (int k = 0; k < K; ++k) {
    const double quota = lambda[k] * subdivision;
    counts[k] = static_cast<int>(std::floor(quota + 1e-12));
    remainder[k] = quota - counts[k];
    assigned += counts[k];
  }
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[a] > remainder[b];
  });
  for (int extra = 0; extra < subdivision - assigned; ++extra) {
    ++counts[order[extra]];
  }
  return counts;
}

// One coarse interval's atom sequence.
std::vector<int> allocate_slots(const Vec& lambda, int subdivision,
                                ChatteringMode mode) {
  const int K = static_cast<int>(lambda.size());
  std::vector<int> slots;
  slots.reserve(subdivision);
  if (mode == ChatteringMode::kBlocks) {
    const std::vector<int> counts = occupation_counts(lambda, subdivision);
    for (int k = 0; k < K; ++k) {
      for (int c = 0; c < counts[k]; ++c) slots.push_back(k);
    }
  } else {
    // Largest-deficit dithering: slot j goes to the atom furthest behind its
    // cumulative quota lambda_k (j+1).
    std::vector<int> given(K, 0);
    for (int j = 0; j < subdivision; ++j) {
      int pick = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        const double deficit = lambda[k] * (j + 1) - given[k];
        if (deficit > best + 1e-15) {
          best = deficit;
          pick = k;
        }
      }
      slots.push_back(pick);
      ++given[pick];
    }
  }
  return slots;
}

}  // namespace

ControlSchedule chattering_schedule(const RelaxedControl& relaxed,
                                    const TimeGrid& grid, int subdivision,
                                    ChatteringMode mode) {
  relaxed.validate();
  grid.validate();
  if (subdivision < 1) {
    throw std::invalid_argument("chattering needs subdivision >= 1");
  }
  if (relaxed.steps() != grid.steps) {
    throw std::invalid_argument("relaxed control length does not match grid");
  }
  ControlSchedule schedule;
  schedule.values.reserve(static_cast<std::size_t>(grid.steps) * subdivision);
  for (int k = 0; k < grid.steps; ++k) {
    for (const int atom : allocate_slots(relaxed.weights[k], subdivision, mode)) {
      schedule.values.push_back(relaxed.atoms[atom]);
    }
  }
  return schedule;
}

RelaxedControl refine_relaxed(const RelaxedControl& relaxed, int subdivision) {
  RelaxedControl fine;
  fine.atoms = relaxed.atoms;
  fine.weights.reserve(relaxed.weights.size() * subdivision);
  for (const auto& lambda : relaxed.weights) {
    for (int s = 0; s < subdivision; ++s) fine.weights.push_back(lambda);
  }
  return fine;
}

double relaxation_gap(const ControlSystem& system, const DiscreteMeasure& mu0,
                      const RelaxedControl& relaxed, const TimeGrid& grid,
                      int subdivision, ChatteringMode mode, const Vec& aux0) {
  const TimeGrid fine = grid.refined(subdivision);
  const TrajectoryBundle relaxed_bundle = solve_relaxed(
      system, mu0, refine_relaxed(relaxed, subdivision), fine, aux0);
  const ControlSchedule chattering =
      chattering_schedule(relaxed, grid, subdivision, mode);
  const TrajectoryBundle chattering_bundle =
      solve(system, mu0, chattering, fine, aux0);
  double gap = 0.0;
  for (int k = 0; k <= fine.steps; ++k) {
    gap = std::max(gap, w1_value(relaxed_bundle.measure_at(k),
                                 chattering_bundle.measure_at(k)));
  }
  return gap;
}

namespace {

// Number of weight vectors on the simplex grid {c/Q : c in N^K, sum c = Q}.
long simplex_grid_size(int atoms, int denominator) {
  // C(Q + K - 1, K - 1)
  long count = 1;
  for (int i = 1; i < atoms; ++i) {
    count = count * (denominator + i) / i;
  }
  return count;
}

// Enumerates compositions of Q into K nonnegative parts in lexicographic
// order. Returns false when exhausted.
bool next_composition(std::vector<int>& comp, int denominator) {
  const int K = static_cast<int>(comp.size());
  if (K == 1) return false;
  // find rightmost position (except last) with remaining mass to shift
  for (int i = K - 2; i >= 0; --i) {
    if (comp[i] > 0) {
      --comp[i];
      int tail = denominator;
      for (int j = 0; j <= i; ++j) tail -= comp[j];
      comp[i + 1] = tail;
      for (int j = i + 2; j < K; ++j) comp[j] = 0;
      return true;
    }
  }
  return false;
}

}  // namespace

ValueResult value_function(const MayerProblem& problem, double tau,
                           const DiscreteMeasure& mu_tau, ValueMode mode,
                           const SearchSpec& search, const Vec& aux_tau) {
  problem.grid.validate();
  if (search.atoms.empty()) {
    throw std::invalid_argument("value_function needs a nonempty atom set");
  }
  // tau must sit on a grid node; the remaining intervals form the horizon.
  const double span = problem.grid.T - problem.grid.t0;
  const double pos = (tau - problem.grid.t0) / span * problem.grid.steps;
  const int node = static_cast<int>(std::lround(pos));
  if (node < 0 || node > problem.grid.steps ||
      std::abs(pos - node) > 1e-9 * problem.grid.steps) {
    throw std::invalid_argument("tau must be a grid node");
  }
  const int intervals = problem.grid.steps - node;

  auto cost_of = [&](const TrajectoryBundle& bundle) {
    return problem.terminal_cost(bundle);
  };

  ValueResult result;
  result.value = std::numeric_limits<double>::infinity();
  if (intervals == 0) {
    const DiscreteMeasure projected = project_positions(
        mu_tau, problem.position_dim > 0 ? problem.position_dim : mu_tau.dim());
    result.value = evaluate_cost(problem.cost, projected, problem.target);
    result.candidates = 1;
    return result;
  }
  const TimeGrid horizon{tau, problem.grid.T, intervals};
  const int K = static_cast<int>(search.atoms.size());

  if (mode == ValueMode::kOrdinary) {
    double total = 1;
    for (int i = 0; i < intervals; ++i) {
      total *= K;
      if (total > static_cast<double>(search.max_candidates)) {
        throw std::invalid_argument("ordinary search space too large");
      }
    }
    std::vector<int> choice(intervals, 0);
    while (true) {
      ControlSchedule schedule;
      schedule.values.reserve(intervals);
      for (const int c : choice) schedule.values.push_back(search.atoms[c]);
      const TrajectoryBundle bundle =
          solve(problem.system, mu_tau, schedule, horizon, aux_tau);
      const double value = cost_of(bundle);
      ++result.candidates;
      if (value < result.value) {
        result.value = value;
        result.argmin_schedule = schedule;
      }
      // odometer over atom choices, lowest interval fastest
      int pos_i = intervals - 1;
      while (pos_i >= 0 && ++choice[pos_i] == K) choice[pos_i--] = 0;
      if (pos_i < 0) break;
    }
    return result;
  }

  // Relaxed mode: per-interval weight vectors on the simplex grid.
  const int Q = search.simplex_denominator;
  if (Q < 1) throw std::invalid_argument("simplex denominator must be >= 1");
  const long per_interval = simplex_grid_size(K, Q);
  double total = 1;
  for (int i = 0; i < intervals; ++i) {
    total *= static_cast<double>(per_interval);
    if (total > static_cast<double>(search.max_candidates)) {
      throw std::invalid_argument("relaxed search space too large");
    }
  }
  // Precompute the simplex grid once.
  std::vector<Vec> grid_points;
  std::vector<int> comp(K, 0);
  comp[0] = Q;
  while (true) {
    Vec lambda(K);
    for (int k = 0; k < K; ++k) lambda[k] = static_cast<double>(comp[k]) / Q;
    grid_points.push_back(lambda);
    if (!next_composition(comp, Q)) break;
  }

  std::vector<int> choice(intervals, 0);
  const int G = static_cast<int>(grid_points.size());
  while (true) {
    RelaxedControl rc;
    rc.atoms = search.atoms;
    rc.weights.reserve(intervals);
    for (const int c : choice) rc.weights.push_back(grid_points[c]);
    const TrajectoryBundle bundle =
        solve_relaxed(problem.system, mu_tau, rc, horizon, aux_tau);
    const double value = cost_of(bundle);
    ++result.candidates;
    if (value < result.value) {
      result.value = value;
      result.argmin_relaxed = rc;
    }
    int pos_i = intervals - 1;
    while (pos_i >= 0 && ++choice[pos_i] == G) choice[pos_i--] = 0;
    if (pos_i < 0) break;
  }
  return result;
}

}  // namespace wassflow
