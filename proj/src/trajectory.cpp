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

#include "wassflow/trajectory.hpp"

#include <cmath>
#include <utility>

#include "stepping.hpp"
#include "wassflow/transport.hpp"

namespace wassflow {

namespace detail {

IntervalField make_interval_field(const ControlSystem& system,
                                  const Vec& weights, const Vec& u) {
  return [&system, weights, u](double t, const Mat& pts,
                               const Vec& aux) -> StateDerivative {
    StateDerivative d;
    const DiscreteMeasure mu(pts, weights);
    const PointMap map = system.field(t, mu, aux, u);
    d.dpoints.resize(pts.rows(), pts.cols());
    for (int i = 0; i < pts.cols(); ++i) {
      d.dpoints.col(i) = map(pts.col(i));
    }
    d.daux = system.aux_dim > 0 ? system.aux_field(t, mu, aux, u) : Vec();
    return d;
  };
}

IntervalField make_relaxed_interval_field(const ControlSystem& system,
                                          const Vec& weights,
                                          const std::vector<Vec>& atoms,
                                          const Vec& lambda) {
  std::vector<int> active;
  for (int k = 0; k < lambda.size(); ++k) {
    if (lambda[k] > 0.0) active.push_back(k);
  }
  if (active.size() == 1 && lambda[active[0]] == 1.0) {
    return make_interval_field(system, weights, atoms[active[0]]);
  }
  return [&system, weights, atoms, lambda,
          active](double t, const Mat& pts, const Vec& aux) -> StateDerivative {
    StateDerivative d;
    const DiscreteMeasure mu(pts, weights);
    std::vector<PointMap> maps;
    maps.reserve(active.size());
    for (const int k : active) {
      maps.push_back(system.field(t, mu, aux, atoms[k]));
    }
    d.dpoints = Mat::Zero(pts.rows(), pts.cols());
    for (int i = 0; i < pts.cols(); ++i) {
      for (std::size_t a = 0; a < active.size(); ++a) {
        d.dpoints.col(i) += lambda[active[a]] * maps[a](pts.col(i));
      }
    }
    if (system.aux_dim > 0) {
      d.daux = Vec::Zero(system.aux_dim);
      for (const int k : active) {
        d.daux += lambda[k] * system.aux_field(t, mu, aux, atoms[k]);
      }
    } else {
      d.daux = Vec();
    }
    return d;
  };
}

void check_finite(const StateDerivative& d, double t) {
  for (int i = 0; i < d.dpoints.cols(); ++i) {
    if (!d.dpoints.col(i).allFinite()) {
      throw SolverError("non-finite field value at t=" + std::to_string(t) +
                        ", atom " + std::to_string(i));
    }
  }
  if (d.daux.size() > 0 && !d.daux.allFinite()) {
    throw SolverError("non-finite auxiliary derivative at t=" +
                      std::to_string(t));
  }
}

void rk4_step(const IntervalField& f, double t, double h, Mat& pts, Vec& aux,
              StateDerivative& k1_out) {
  const StateDerivative k1 = f(t, pts, aux);
  check_finite(k1, t);
  const auto shifted = [&](const StateDerivative& k, double c) {
    Mat p = pts + c * k.dpoints;
    Vec a = aux.size() > 0 ? Vec(aux + c * k.daux) : aux;
    return std::make_pair(std::move(p), std::move(a));
  };
  auto [p2, a2] = shifted(k1, h / 2);
  const StateDerivative k2 = f(t + h / 2, p2, a2);
  check_finite(k2, t + h / 2);
  auto [p3, a3] = shifted(k2, h / 2);
  const StateDerivative k3 = f(t + h / 2, p3, a3);
  check_finite(k3, t + h / 2);
  auto [p4, a4] = shifted(k3, h);
  const StateDerivative k4 = f(t + h, p4, a4);
  check_finite(k4, t + h);

  pts += (h / 6.0) *
         (k1.dpoints + 2.0 * k2.dpoints + 2.0 * k3.dpoints + k4.dpoints);
  if (aux.size() > 0) {
    aux += (h / 6.0) * (k1.daux + 2.0 * k2.daux + 2.0 * k3.daux + k4.daux);
  }
  k1_out = k1;
}

TrajectoryBundle integrate_core(
    const TimeGrid& grid, const DiscreteMeasure& mu0, const Vec& aux0,
    const std::function<IntervalField(int)>& field_at) {
  TrajectoryBundle bundle;
  bundle.grid = grid;
  bundle.weights = mu0.weights();
  bundle.points.reserve(grid.steps + 1);
  bundle.aux.reserve(grid.steps + 1);
  bundle.points.push_back(mu0.points());
  bundle.aux.push_back(aux0);

  Mat pts = mu0.points();
  Vec aux = aux0;
  const double h = grid.dt();
  for (int k = 0; k < grid.steps; ++k) {
    const IntervalField f = field_at(k);
    StateDerivative k1;
    rk4_step(f, grid.time(k), h, pts, aux, k1);
    bundle.vel_left.push_back(std::move(k1.dpoints));

    StateDerivative right = f(grid.time(k + 1), pts, aux);
    check_finite(right, grid.time(k + 1));
    bundle.vel_right.push_back(std::move(right.dpoints));

    bundle.points.push_back(pts);
    bundle.aux.push_back(aux);
  }
  return bundle;
}

namespace {

enum class ControlHandling { kFlag, kProject };

TrajectoryBundle integrate_controlled(const ControlSystem& system,
                                      const DiscreteMeasure& mu0,
                                      const ControlSchedule& schedule,
                                      const TimeGrid& grid, const Vec& aux0,
                                      ControlHandling handling) {
  system.validate();
  grid.validate();
  if (mu0.dim() != system.dim) {
    throw std::invalid_argument("initial measure dimension mismatch");
  }
  if (schedule.steps() != grid.steps) {
    throw std::invalid_argument("schedule length does not match grid");
  }
  if (static_cast<int>(aux0.size()) != system.aux_dim) {
    throw std::invalid_argument("auxiliary state dimension mismatch");
  }
  for (const auto& u : schedule.values) {
    if (static_cast<int>(u.size()) != system.control_dim) {
      throw std::invalid_argument("control dimension mismatch in schedule");
    }
  }

  // Controls are resolved against the state at the left endpoint of each
  // interval, which is only known once integration reaches it; the core loop
  // is re-run here with the control hook inlined.
  TrajectoryBundle bundle;
  bundle.grid = grid;
  bundle.weights = mu0.weights();
  bundle.points.push_back(mu0.points());
  bundle.aux.push_back(aux0);
  bundle.schedule.values.reserve(grid.steps);

  Mat pts = mu0.points();
  Vec aux = aux0;
  const double h = grid.dt();
  for (int k = 0; k < grid.steps; ++k) {
    const double t = grid.time(k);
    Vec u = schedule.values[k];
    if (system.control_set) {
      const ControlSetSpec spec =
          system.control_set(t, DiscreteMeasure(pts, bundle.weights), aux);
      if (handling == ControlHandling::kProject) {
        u = spec.project(u);
      } else if (!spec.contains(u, 1e-9)) {
        bundle.flagged_steps.push_back(k);
      }
    }
    bundle.schedule.values.push_back(u);

    const IntervalField f = make_interval_field(system, bundle.weights, u);
    StateDerivative k1;
    rk4_step(f, t, h, pts, aux, k1);
    bundle.vel_left.push_back(std::move(k1.dpoints));

    StateDerivative right = f(grid.time(k + 1), pts, aux);
    check_finite(right, grid.time(k + 1));
    bundle.vel_right.push_back(std::move(right.dpoints));

    bundle.points.push_back(pts);
    bundle.aux.push_back(aux);
  }
  return bundle;
}

}  // namespace

}  // namespace detail

TrajectoryBundle solve(const ControlSystem& system, const DiscreteMeasure& mu0,
                       const ControlSchedule& schedule, const TimeGrid& grid,
                       const Vec& aux0) {
  return detail::integrate_controlled(system, mu0, schedule, grid, aux0,
                                      detail::ControlHandling::kFlag);
}

TrajectoryBundle solve_projected(const ControlSystem& system,
                                 const DiscreteMeasure& mu0,
                                 const ControlSchedule& raw_schedule,
                                 const TimeGrid& grid, const Vec& aux0) {
  return detail::integrate_controlled(system, mu0, raw_schedule, grid, aux0,
                                      detail::ControlHandling::kProject);
}

AprioriBounds gronwall_bounds(double r, double m_bar, const TimeGrid& grid) {
  if (r < 0 || m_bar < 0) {
    throw std::invalid_argument("gronwall_bounds needs r, m_bar >= 0");
  }
  grid.validate();
  AprioriBounds out;
  out.radius =
      ((1.0 + 2.0 * r) * std::exp(2.0 * m_bar * (grid.T - grid.t0)) - 1.0) /
      2.0;
  out.modulus = m_bar * (1.0 + 2.0 * out.radius);
  return out;
}

namespace {

// Smooth bump profile e^{-1/t} with a hard zero below a small threshold; the
// discarded tail is below 1e-43, far under every tolerance in use, and the
// cut avoids 0 * inf in the gradient.
constexpr double kBumpCut = 1e-2;

double bump_profile(double t) {
  return t > kBumpCut ? std::exp(-1.0 / t) : 0.0;
}

double bump_profile_derivative(double t) {
  return t > kBumpCut ? std::exp(-1.0 / t) / (t * t) : 0.0;
}

}  // namespace

TestFunction test_function_space_bump(int dim, double radius) {
  const double r2 = radius * radius;
  TestFunction fn;
  fn.name = "bump";
  fn.value = [r2](double, const Vec& x) {
    return bump_profile(1.0 - x.squaredNorm() / r2);
  };
  fn.dt = [](double, const Vec&) { return 0.0; };
  fn.grad = [r2, dim](double, const Vec& x) -> Vec {
    const double t = 1.0 - x.squaredNorm() / r2;
    if (t <= kBumpCut) return Vec::Zero(dim);
    return (-bump_profile_derivative(t) * 2.0 / r2) * x;
  };
  return fn;
}

TestFunction test_function_linear_bump(int dim, double radius) {
  const TestFunction bump = test_function_space_bump(dim, radius);
  Vec dir = Vec::Ones(dim);
  dir /= dir.norm();
  TestFunction fn;
  fn.name = "linear*bump";
  fn.value = [bump, dir](double t, const Vec& x) {
    return dir.dot(x) * bump.value(t, x);
  };
  fn.dt = [](double, const Vec&) { return 0.0; };
  fn.grad = [bump, dir](double t, const Vec& x) -> Vec {
    return bump.value(t, x) * dir + dir.dot(x) * bump.grad(t, x);
  };
  return fn;
}

TestFunction test_function_time_bump(int dim, double radius,
                                     const TimeGrid& grid) {
  const TestFunction bump = test_function_space_bump(dim, radius);
  const double t0 = grid.t0, T = grid.T;
  auto window = [t0, T](double t) {
    const double z = 2.0 * (t - t0) / (T - t0) - 1.0;
    return bump_profile(1.0 - z * z);
  };
  auto window_dt = [t0, T](double t) {
    const double z = 2.0 * (t - t0) / (T - t0) - 1.0;
    const double s = 1.0 - z * z;
    if (s <= kBumpCut) return 0.0;
    return bump_profile_derivative(s) * (-2.0 * z) * (2.0 / (T - t0));
  };
  TestFunction fn;
  fn.name = "time_bump*bump";
  fn.value = [bump, window](double t, const Vec& x) {
    return window(t) * bump.value(t, x);
  };
  fn.dt = [bump, window_dt](double t, const Vec& x) {
    return window_dt(t) * bump.value(t, x);
  };
  fn.grad = [bump, window](double t, const Vec& x) -> Vec {
    return window(t) * bump.grad(t, x);
  };
  return fn;
}

std::vector<TestFunction> standard_test_functions(int dim, double radius,
                                                  const TimeGrid& grid) {
  std::vector<TestFunction> fns;
  const TestFunction base = test_function_time_bump(dim, radius, grid);
  fns.push_back(base);

  Vec dir = Vec::Ones(dim);
  dir /= dir.norm();
  TestFunction linear;
  linear.name = "time_bump*linear*bump";
  linear.value = [base, dir](double t, const Vec& x) {
    return dir.dot(x) * base.value(t, x);
  };
  linear.dt = [base, dir](double t, const Vec& x) {
    return dir.dot(x) * base.dt(t, x);
  };
  linear.grad = [base, dir](double t, const Vec& x) -> Vec {
    return base.value(t, x) * dir + dir.dot(x) * base.grad(t, x);
  };
  fns.push_back(linear);

  TestFunction quad;
  quad.name = "time_bump*quadratic*bump";
  quad.value = [base](double t, const Vec& x) {
    return x.squaredNorm() * base.value(t, x);
  };
  quad.dt = [base](double t, const Vec& x) {
    return x.squaredNorm() * base.dt(t, x);
  };
  quad.grad = [base](double t, const Vec& x) -> Vec {
    return 2.0 * base.value(t, x) * x + x.squaredNorm() * base.grad(t, x);
  };
  fns.push_back(quad);
  return fns;
}

double weak_form_residual(const TrajectoryBundle& bundle,
                          const TestFunction& phi) {
  const int steps = bundle.grid.steps;
  const Vec& w = bundle.weights;
  auto node_integrand = [&](int node, const Mat& vel) {
    const double t = bundle.grid.time(node);
    double acc = 0.0;
    for (int i = 0; i < bundle.atom_count(); ++i) {
      const Vec x = bundle.points[node].col(i);
      acc += w[i] * (phi.dt(t, x) + phi.grad(t, x).dot(vel.col(i)));
    }
    return acc;
  };
  const double h = bundle.grid.dt();
  double quadrature = 0.0;
  for (int k = 0; k < steps; ++k) {
    quadrature += 0.5 * h * (node_integrand(k, bundle.vel_left[k]) +
                             node_integrand(k + 1, bundle.vel_right[k]));
  }
  double boundary = 0.0;
  for (int i = 0; i < bundle.atom_count(); ++i) {
    boundary += w[i] * (phi.value(bundle.grid.T, bundle.points[steps].col(i)) -
                        phi.value(bundle.grid.t0, bundle.points[0].col(i)));
  }
  return std::abs(quadrature - boundary);
}

const ControlSchedule& extract_selection(const TrajectoryBundle& bundle) {
  if (bundle.relaxed_selection.has_value()) {
    throw std::invalid_argument(
        "bundle carries a relaxed selection, not an ordinary schedule");
  }
  return bundle.schedule;
}

RoundTripResult verify_round_trip(const ControlSystem& system,
                                  const DiscreteMeasure& mu0,
                                  const ControlSchedule& schedule,
                                  const TimeGrid& grid,
                                  const TrajectoryBundle& expected,
                                  const Vec& aux0) {
  const TrajectoryBundle redo = solve(system, mu0, schedule, grid, aux0);
  for (int k = 0; k <= grid.steps; ++k) {
    const bool same_points =
        (redo.points[k].array() == expected.points[k].array()).all();
    const bool same_aux =
        redo.aux[k].size() == expected.aux[k].size() &&
        (redo.aux[k].array() == expected.aux[k].array()).all();
    if (!same_points || !same_aux) return {false, k};
  }
  return {true, -1};
}

FamilyBoundsReport family_bounds_check(
    const std::vector<TrajectoryBundle>& bundles, const AprioriBounds& bounds,
    double tol, int exact_w1_max_atoms) {
  FamilyBoundsReport report;
  for (std::size_t b = 0; b < bundles.size(); ++b) {
    const TrajectoryBundle& bundle = bundles[b];
    const int nodes = bundle.grid.steps + 1;
    for (int k = 0; k < nodes; ++k) {
      const double sr = support_radius(bundle.measure_at(k));
      report.max_support_radius = std::max(report.max_support_radius, sr);
      if (sr > bounds.radius + 1e-12) {
        report.ok = false;
        report.violations.push_back(
            "bundle " + std::to_string(b) + ": support radius " +
            std::to_string(sr) + " exceeds envelope at node " +
            std::to_string(k));
      }
    }
    const bool exact = bundle.atom_count() <= exact_w1_max_atoms;
    for (int s = 0; s < nodes; ++s) {
      for (int t = s + 1; t < nodes; ++t) {
        double dist;
        if (exact) {
          dist = w1_value(bundle.measure_at(s), bundle.measure_at(t));
        } else {
          // particle-identity coupling: a feasible plan, hence >= W1
          dist = bundle.weights.dot((bundle.points[t] - bundle.points[s])
                                        .colwise()
                                        .norm()
                                        .transpose());
        }
        const double span = bundle.grid.time(t) - bundle.grid.time(s);
        report.max_rate = std::max(report.max_rate, dist / span);
        if (dist > bounds.modulus * span + tol) {
          report.ok = false;
          report.violations.push_back(
              "bundle " + std::to_string(b) + ": W1 between nodes " +
              std::to_string(s) + "," + std::to_string(t) +
              " breaks the modulus bound");
        }
      }
    }
  }
  return report;
}

}  // namespace wassflow
