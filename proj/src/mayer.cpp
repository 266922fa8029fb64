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

#include "wassflow/mayer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <utility>

namespace wassflow {

RegionSpec RegionSpec::ball(Vec center, double radius) {
  RegionSpec r;
  r.parts.push_back(Ball{std::move(center), radius});
  return r;
}

RegionSpec RegionSpec::box(Vec low, Vec high) {
  RegionSpec r;
  r.parts.push_back(Box{std::move(low), std::move(high)});
  return r;
}

RegionSpec RegionSpec::half_space(Vec normal, double offset) {
  RegionSpec r;
  r.parts.push_back(HalfSpace{std::move(normal), offset});
  return r;
}

RegionSpec RegionSpec::unite(const RegionSpec& other) const {
  RegionSpec r = *this;
  r.parts.insert(r.parts.end(), other.parts.begin(), other.parts.end());
  return r;
}

void RegionSpec::validate(int dim) const {
  if (parts.empty()) throw std::invalid_argument("region has no parts");
  for (const auto& part : parts) {
    if (const auto* b = std::get_if<Ball>(&part)) {
      if (b->center.size() != dim || b->radius < 0) {
        throw std::invalid_argument("bad ball region");
      }
    } else if (const auto* bx = std::get_if<Box>(&part)) {
      if (bx->low.size() != dim || bx->high.size() != dim ||
          (bx->low.array() > bx->high.array()).any()) {
        throw std::invalid_argument("bad box region");
      }
    } else if (const auto* h = std::get_if<HalfSpace>(&part)) {
      if (h->normal.size() != dim || h->normal.norm() == 0.0) {
        throw std::invalid_argument("bad half-space region");
      }
    }
  }
}

namespace {

double part_distance(const RegionSpec::Part& part, const Vec& x) {
  if (const auto* b = std::get_if<RegionSpec::Ball>(&part)) {
    return std::max(0.0, (x - b->center).norm() - b->radius);
  }
  if (const auto* bx = std::get_if<RegionSpec::Box>(&part)) {
    const Vec below = (bx->low - x).cwiseMax(0.0);
    const Vec above = (x - bx->high).cwiseMax(0.0);
    return std::sqrt(below.squaredNorm() + above.squaredNorm());
  }
  const auto& h = std::get<RegionSpec::HalfSpace>(part);
  return std::max(0.0, (h.normal.dot(x) - h.offset) / h.normal.norm());
}

}  // namespace

double RegionSpec::distance(const Vec& x) const {
  if (parts.empty()) throw std::invalid_argument("region has no parts");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& part : parts) best = std::min(best, part_distance(part, x));
  return best;
}

CostSpec CostSpec::mollified(double eps) {
  if (eps <= 0) throw std::invalid_argument("mollified cost needs eps > 0");
  return {Kind::kMollifiedIndicator, eps, {}};
}

CostSpec CostSpec::custom_cost(std::function<double(const DiscreteMeasure&)> f) {
  if (!f) throw std::invalid_argument("custom cost needs a functional");
  CostSpec c;
  c.kind = Kind::kCustom;
  c.custom = std::move(f);
  return c;
}

double lambda_constraint(const DiscreteMeasure& mu, const RegionSpec& safe) {
  double acc = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    acc += mu.weights()[i] * safe.distance(mu.points().col(i));
  }
  return acc;
}

double evaluate_cost(const CostSpec& cost, const DiscreteMeasure& muT,
                     const RegionSpec& target) {
  switch (cost.kind) {
    case CostSpec::Kind::kIndicatorFraction: {
      double inside = 0.0;
      for (int i = 0; i < muT.size(); ++i) {
        if (target.distance(muT.points().col(i)) <= 0.0) {
          inside += muT.weights()[i];
        }
      }
      return -inside;
    }
    case CostSpec::Kind::kMollifiedIndicator: {
      double acc = 0.0;
      for (int i = 0; i < muT.size(); ++i) {
        const double d = target.distance(muT.points().col(i));
        acc += muT.weights()[i] * std::max(0.0, 1.0 - d / cost.eps);
      }
      return -acc;
    }
    case CostSpec::Kind::kCustom:
      return cost.custom(muT);
  }
  throw std::invalid_argument("unknown cost kind");
}

void MayerProblem::validate() const {
  system.validate();
  grid.validate();
  if (mu0.dim() != system.dim) {
    throw std::invalid_argument("initial measure does not match system dimension");
  }
  if (position_dim < 1 || position_dim > system.dim) {
    throw std::invalid_argument("position_dim out of range");
  }
  if (static_cast<int>(aux0.size()) != system.aux_dim) {
    throw std::invalid_argument("aux0 does not match system aux dimension");
  }
  if (cost.kind != CostSpec::Kind::kCustom) target.validate(position_dim);
  if (cost.kind == CostSpec::Kind::kMollifiedIndicator && cost.eps <= 0) {
    throw std::invalid_argument("mollified cost needs eps > 0");
  }
  if (safe) safe->validate(position_dim);
  if (terminal) terminal->validate(position_dim);
}

double MayerProblem::terminal_cost(const TrajectoryBundle& bundle) const {
  const DiscreteMeasure muT =
      project_positions(bundle.measure_at(bundle.grid.steps), position_dim);
  return evaluate_cost(cost, muT, target);
}

namespace {

struct Candidate {
  TrajectoryBundle bundle;
  double cost = 0.0;
  double max_lambda = 0.0;
  double terminal_distance = 0.0;
  double penalized = 0.0;
  bool feasible = false;
  bool valid = false;
};

// Feasible candidates dominate infeasible ones regardless of cost; within a
// class the (penalized) cost decides. Strict comparison, so the earlier of
// two equal candidates is kept.
bool strictly_better(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (a.feasible != b.feasible) return a.feasible;
  return a.feasible ? a.cost < b.cost : a.penalized < b.penalized;
}

class CandidateEvaluator {
 public:
  CandidateEvaluator(const MayerProblem& problem,
                     const OptimizerOptions& options)
      : problem_(problem), options_(options) {}

  int decision_dim() const {
    return options_.control_knots * problem_.system.control_dim;
  }

  ControlSchedule expand(const Vec& z) const {
    const int cd = problem_.system.control_dim;
    const int steps = problem_.grid.steps;
    ControlSchedule schedule;
    schedule.values.reserve(steps);
    for (int k = 0; k < steps; ++k) {
      const int knot = std::min(options_.control_knots - 1,
                                k * options_.control_knots / steps);
      schedule.values.push_back(z.segment(knot * cd, cd));
    }
    return schedule;
  }

  Candidate operator()(const Vec& z) const {
    Candidate c;
    const TrajectoryBundle bundle = solve_projected(
        problem_.system, problem_.mu0, expand(z), problem_.grid, problem_.aux0);
    c.cost = problem_.terminal_cost(bundle);
    if (problem_.safe) {
      for (int k = 0; k <= problem_.grid.steps; ++k) {
        const DiscreteMeasure pos =
            project_positions(bundle.measure_at(k), problem_.position_dim);
        c.max_lambda = std::max(c.max_lambda,
                                lambda_constraint(pos, *problem_.safe));
      }
    }
    if (problem_.terminal) {
      const DiscreteMeasure pos = project_positions(
          bundle.measure_at(problem_.grid.steps), problem_.position_dim);
      c.terminal_distance = lambda_constraint(pos, *problem_.terminal);
    }
    c.penalized = c.cost + options_.penalty_run * c.max_lambda +
                  options_.penalty_terminal * c.terminal_distance;
    c.feasible = c.max_lambda <= problem_.running_tol &&
                 c.terminal_distance <= problem_.running_tol;
    c.bundle = bundle;
    c.valid = true;
    return c;
  }

 private:
  const MayerProblem& problem_;
  const OptimizerOptions& options_;
};

struct StartResult {
  Candidate best;
  std::vector<double> objective_log;  // penalized objective per evaluation
  bool failed = false;
};

// Nelder-Mead with box projection of every proposed point. Runs until the
// evaluation budget is spent.
StartResult nelder_mead(const CandidateEvaluator& eval, const Vec& z0,
                        const Vec& lo, const Vec& hi, int max_evals) {
  StartResult result;
  const int D = static_cast<int>(z0.size());
  long evals = 0;

  auto clip = [&](Vec z) {
    return Vec(z.cwiseMax(lo).cwiseMin(hi));
  };
  auto objective = [&](const Vec& z) -> double {
    const Candidate c = eval(z);
    ++evals;
    result.objective_log.push_back(c.penalized);
    if (strictly_better(c, result.best)) result.best = c;
    return c.penalized;
  };

  std::vector<Vec> simplex;
  std::vector<double> f;
  simplex.reserve(D + 1);
  simplex.push_back(clip(z0));
  f.push_back(objective(simplex[0]));
  for (int i = 0; i < D && evals < max_evals; ++i) {
    Vec v = simplex[0];
    const double span = 0.25 * (hi[i] - lo[i]);
    v[i] += (v[i] + span <= hi[i]) ? span : -span;
    simplex.push_back(clip(v));
    f.push_back(objective(simplex.back()));
  }
  if (static_cast<int>(simplex.size()) < D + 1) return result;

  std::vector<int> order(D + 1);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return f[a] < f[b]; });
    const int worst = order[D], second = order[D - 1], best = order[0];

    Vec centroid = Vec::Zero(D);
    for (int i = 0; i < D; ++i) centroid += simplex[order[i]];
    centroid /= D;

    const Vec reflected = clip(centroid + (centroid - simplex[worst]));
    const double fr = objective(reflected);
    if (fr < f[best] && evals < max_evals) {
      const Vec expanded = clip(centroid + 2.0 * (centroid - simplex[worst]));
      const double fe = objective(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        f[worst] = fe;
      } else {
        simplex[worst] = reflected;
        f[worst] = fr;
      }
    } else if (fr < f[second]) {
      simplex[worst] = reflected;
      f[worst] = fr;
    } else if (evals < max_evals) {
      const Vec contracted =
          clip(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = objective(contracted);
      if (fc < f[worst]) {
        simplex[worst] = contracted;
        f[worst] = fc;
      } else {
        for (int i = 1; i <= D && evals < max_evals; ++i) {
          simplex[order[i]] =
              clip(simplex[best] + 0.5 * (simplex[order[i]] - simplex[best]));
          f[order[i]] = objective(simplex[order[i]]);
        }
      }
    }
  }
  return result;
}

Vec outer_box_bounds(const MayerProblem& problem) {
  if (!problem.system.control_set) {
    throw std::invalid_argument(
        "solve_mayer needs a control-set rule (compact admissible sets)");
  }
  const ControlSetSpec spec = problem.system.control_set(
      problem.grid.t0, problem.mu0, problem.aux0);
  const int cd = problem.system.control_dim;
  Vec outer(cd);
  switch (spec.kind) {
    case ControlSetSpec::Kind::kBox:
      outer = spec.box_bounds;
      break;
    case ControlSetSpec::Kind::kBlockNormBall:
      for (int i = 0; i < cd; ++i) {
        outer[i] = spec.block_bounds[i / spec.block_size];
      }
      break;
    case ControlSetSpec::Kind::kAtoms:
      throw std::invalid_argument(
          "solve_mayer handles box/ball control sets; use value_function for "
          "finite atom sets");
  }
  return outer;
}

}  // namespace

SolveReport solve_mayer(const MayerProblem& problem,
                        const OptimizerOptions& options) {
  problem.validate();
  if (options.starts < 1 || options.control_knots < 1 ||
      options.max_evals_per_start < 1) {
    throw std::invalid_argument("bad optimizer options");
  }
  const CandidateEvaluator evaluator(problem, options);
  const int D = evaluator.decision_dim();
  const Vec outer = outer_box_bounds(problem);
  Vec lo(D), hi(D);
  for (int i = 0; i < D; ++i) {
    const double b = outer[i % problem.system.control_dim];
    lo[i] = -b;
    hi[i] = b;
  }

  // Start 0 is the zero control; user warm starts follow; the rest are
  // seeded uniform draws in the outer box.
  std::vector<Vec> starts;
  starts.push_back(Vec::Zero(D));
  for (const Vec& w : options.warm_starts) {
    if (w.size() == D) starts.push_back(w);
  }
  Rng rng(options.seed);
  while (static_cast<int>(starts.size()) < options.starts) {
    Rng sub = rng.derive(starts.size());
    Vec z(D);
    for (int i = 0; i < D; ++i) z[i] = sub.uniform(lo[i], hi[i]);
    starts.push_back(z);
  }

  std::vector<StartResult> results(starts.size());
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (std::size_t s = 0; s < starts.size(); ++s) {
      try {
        results[s] = nelder_mead(evaluator, starts[s], lo, hi,
                                 options.max_evals_per_start);
      } catch (const SolverError&) {
        results[s].failed = true;
      }
    }
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        for (std::size_t s = t; s < starts.size();
             s += static_cast<std::size_t>(threads)) {
          try {
            results[s] = nelder_mead(evaluator, starts[s], lo, hi,
                                     options.max_evals_per_start);
          } catch (const SolverError&) {
            results[s].failed = true;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  SolveReport report;
  report.seed = options.seed;
  Candidate best;
  int best_start = -1;
  for (std::size_t s = 0; s < results.size(); ++s) {
    if (results[s].failed) continue;
    report.evaluations +=
        static_cast<long>(results[s].objective_log.size());
    if (strictly_better(results[s].best, best)) {
      best = results[s].best;
      best_start = static_cast<int>(s);
    }
  }
  if (!best.valid) {
    throw SolverError("no candidate could be evaluated on any start");
  }
  // Minimizing-sequence log: running best of the per-start objective logs,
  // concatenated in start order.
  double running = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    for (const double value : r.objective_log) {
      running = std::min(running, value);
      report.trace.push_back(running);
    }
  }
  report.best_schedule = best.bundle.schedule;
  report.best_bundle = std::move(best.bundle);
  report.cost = best.cost;
  report.max_lambda = best.max_lambda;
  report.terminal_distance = best.terminal_distance;
  report.feasible = best.feasible;
  report.best_start = best_start;
  return report;
}

AdmissibilityReport check_admissibility(const TrajectoryBundle& bundle,
                                        const MayerProblem& problem) {
  AdmissibilityReport report;
  const int nodes = bundle.grid.steps + 1;
  report.lambda.reserve(nodes);
  for (int k = 0; k < nodes; ++k) {
    const DiscreteMeasure pos =
        project_positions(bundle.measure_at(k), problem.position_dim);
    const double lam =
        problem.safe ? lambda_constraint(pos, *problem.safe) : 0.0;
    report.lambda.push_back(lam);
    report.max_lambda = std::max(report.max_lambda, lam);
  }
  if (problem.terminal) {
    const DiscreteMeasure pos = project_positions(
        bundle.measure_at(bundle.grid.steps), problem.position_dim);
    report.terminal_distance = lambda_constraint(pos, *problem.terminal);
    report.terminal_ok = report.terminal_distance <= problem.running_tol;
  }
  if (problem.system.control_set) {
    for (int k = 0; k < bundle.grid.steps; ++k) {
      const ControlSetSpec spec = problem.system.control_set(
          bundle.grid.time(k), bundle.measure_at(k), bundle.aux[k]);
      if (!spec.contains(bundle.schedule.values[k], problem.running_tol)) {
        report.control_violations.push_back(k);
      }
    }
  }
  report.admissible = report.max_lambda <= problem.running_tol &&
                      report.terminal_ok && report.control_violations.empty();
  return report;
}

}  // namespace wassflow
