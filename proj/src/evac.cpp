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

#include "wassflow/evac.hpp"

#include <cmath>
#include <memory>

namespace wassflow {

void LeaderState::validate() const {
  if (positions.cols() < 1) {
    throw std::invalid_argument("need at least one leader");
  }
  if (positions.rows() != velocities.rows() ||
      positions.cols() != velocities.cols()) {
    throw std::invalid_argument("leader position/velocity shape mismatch");
  }
  if (!positions.allFinite() || !velocities.allFinite()) {
    throw std::invalid_argument("leader state has non-finite entries");
  }
}

Vec LeaderState::flatten() const {
  const int d = space_dim(), M = count();
  Vec aux(2 * d * M);
  for (int i = 0; i < M; ++i) {
    aux.segment(i * d, d) = positions.col(i);
    aux.segment(d * M + i * d, d) = velocities.col(i);
  }
  return aux;
}

LeaderState LeaderState::unflatten(const Vec& aux, int d, int M) {
  if (aux.size() != 2 * d * M) {
    throw std::invalid_argument("auxiliary state has wrong size for leaders");
  }
  LeaderState state;
  state.positions.resize(d, M);
  state.velocities.resize(d, M);
  for (int i = 0; i < M; ++i) {
    state.positions.col(i) = aux.segment(i * d, d);
    state.velocities.col(i) = aux.segment(d * M + i * d, d);
  }
  return state;
}

PhaseMeasure LeaderState::empirical() const {
  const int d = space_dim(), M = count();
  Mat pts(2 * d, M);
  pts.topRows(d) = positions;
  pts.bottomRows(d) = velocities;
  return PhaseMeasure(DiscreteMeasure::uniform(std::move(pts)));
}

void CongestionParams::validate() const {
  if (C <= 0) throw std::invalid_argument("congestion C must be positive");
  if (eta < 0 || eta > 1) {
    throw std::invalid_argument("congestion eta must lie in [0, 1]");
  }
}

double congestion_bound(const PhaseMeasure& mu, const Vec& y,
                        const CongestionParams& p, const Mollifier& rho) {
  const double density = mollifier_density(mu.position_marginal(), y, rho);
  return std::max(0.0, p.C * (1.0 - p.eta * density));
}

PointMap crowd_field(const PhaseMeasure& mu, const LeaderState& leaders,
                     const KernelParams& kernels) {
  kernels.validate();
  const int d = mu.space_dim();
  if (leaders.space_dim() != d) {
    throw std::invalid_argument("leader dimension does not match the crowd");
  }
  // Snapshot everything; the map stays valid after mu and leaders change.
  const Mat XP = mu.positions();
  const Mat XV = mu.velocities();
  const Vec w = mu.measure().weights();
  const Mat YP = leaders.positions;
  const Mat YV = leaders.velocities;
  const MorseParams morse = kernels.morse;
  const CuckerSmaleParams cs = kernels.cs;
  const MorseVariant variant = kernels.morse_variant;
  const double leader_mass = 1.0 / leaders.count();

  return [=](const Vec& q) -> Vec {
    const auto x = q.head(d);
    const auto v = q.tail(d);
    Vec out(2 * d);
    out.head(d) = v;

    Vec acc = Vec::Zero(d);
    // Morse self-interaction over the crowd.
    const Eigen::ArrayXd r =
        (XP.colwise() - x).colwise().norm().transpose().array();
    Eigen::ArrayXd mult = Eigen::ArrayXd::Zero(r.size());
    if (morse.R1 > 0) mult += morse.R1 * (-r / morse.R2).exp();
    if (morse.A1 > 0) mult -= morse.A1 * (-r / morse.A2).exp();
    if (variant == MorseVariant::kAsWritten) {
      const Vec wm = (w.array() * mult).matrix();
      acc += wm.sum() * v - XV * wm;
    } else {
      for (int j = 0; j < XP.cols(); ++j) {
        if (r[j] > 0.0) {
          acc += (w[j] * mult[j] / r[j]) * (x - XP.col(j));
        }
      }
    }
    // Cucker-Smale alignment with the leaders.
    const Eigen::ArrayXd rl =
        (YP.colwise() - x).colwise().norm().transpose().array();
    const Eigen::ArrayXd gain =
        leader_mass * cs.K / (cs.sigma + rl).pow(2.0 * cs.beta);
    acc += YV * gain.matrix() - gain.sum() * v;

    out.tail(d) = acc;
    return out;
  };
}

LeaderState leader_field(const Vec& u, const LeaderState& leaders) {
  const int d = leaders.space_dim(), M = leaders.count();
  if (u.size() != d * M) {
    throw std::invalid_argument("leader control has wrong dimension");
  }
  LeaderState derivative;
  derivative.positions = leaders.velocities;
  derivative.velocities.resize(d, M);
  for (int i = 0; i < M; ++i) {
    derivative.velocities.col(i) = u.segment(i * d, d);
  }
  return derivative;
}

void EvacScenario::validate() const {
  crowd0.measure();  // construction already validated the measure
  leaders0.validate();
  kernels.validate();
  congestion.validate();
  grid.validate();
  const int d = crowd0.space_dim();
  if (leaders0.space_dim() != d) {
    throw std::invalid_argument("leader/crowd dimension mismatch");
  }
  target.validate(d);
  safe.validate(d);
}

ControlSystem make_evac_system(const EvacScenario& scenario) {
  scenario.validate();
  const int d = scenario.crowd0.space_dim();
  const int M = scenario.leaders0.count();
  const KernelParams kernels = scenario.kernels;
  const CongestionParams congestion = scenario.congestion;
  const auto rho = std::make_shared<Mollifier>(kernels.mollifier.radius, d);

  ControlSystem system;
  system.dim = 2 * d;
  system.control_dim = d * M;
  system.aux_dim = 2 * d * M;
  system.field = [kernels, d, M](double, const DiscreteMeasure& mu,
                                 const Vec& aux, const Vec&) -> PointMap {
    return crowd_field(PhaseMeasure(mu), LeaderState::unflatten(aux, d, M),
                       kernels);
  };
  system.aux_field = [d, M](double, const DiscreteMeasure&, const Vec& aux,
                            const Vec& u) -> Vec {
    const LeaderState leaders = LeaderState::unflatten(aux, d, M);
    const LeaderState derivative = leader_field(u, leaders);
    return derivative.flatten();
  };
  system.control_set = [congestion, rho, d, M](double, const DiscreteMeasure& mu,
                                               const Vec& aux) -> ControlSetSpec {
    const PhaseMeasure phase(mu);
    const LeaderState leaders = LeaderState::unflatten(aux, d, M);
    Vec bounds(M);
    for (int i = 0; i < M; ++i) {
      bounds[i] = congestion_bound(phase, leaders.positions.col(i), congestion,
                                   *rho);
    }
    return ControlSetSpec::block_norm_ball(std::move(bounds), d);
  };
  return system;
}

namespace {

// Representative point of the target used for aiming heuristics: the centre
// of the first ball or box part, or the crowd barycenter if the target leads
// with a half-space.
Vec target_anchor(const EvacScenario& scenario) {
  const auto& part = scenario.target.parts.front();
  if (const auto* b = std::get_if<RegionSpec::Ball>(&part)) return b->center;
  if (const auto* bx = std::get_if<RegionSpec::Box>(&part)) {
    return 0.5 * (bx->low + bx->high);
  }
  return scenario.crowd0.positions().rowwise().mean();
}

}  // namespace

Vec aim_control(const EvacScenario& scenario, double magnitude) {
  const int d = scenario.crowd0.space_dim();
  const int M = scenario.leaders0.count();
  const Vec anchor = target_anchor(scenario);
  Vec u(d * M);
  for (int i = 0; i < M; ++i) {
    Vec dir = anchor - scenario.leaders0.positions.col(i);
    const double norm = dir.norm();
    if (norm > 1e-12) {
      dir *= magnitude / norm;
    } else {
      dir.setZero();
    }
    u.segment(i * d, d) = dir;
  }
  return u;
}

MayerProblem build_problem(const EvacScenario& scenario) {
  scenario.validate();
  const int d = scenario.crowd0.space_dim();

  MayerProblem problem;
  problem.system = make_evac_system(scenario);
  problem.grid = scenario.grid;
  problem.mu0 = scenario.crowd0.measure();
  problem.aux0 = scenario.leaders0.flatten();
  problem.position_dim = d;
  problem.cost = scenario.cost;
  problem.target = scenario.target;
  problem.safe = scenario.safe;
  problem.running_tol = 1e-6;

  const double lambda0 =
      lambda_constraint(scenario.crowd0.position_marginal(), scenario.safe);
  if (lambda0 > problem.running_tol) {
    throw std::invalid_argument(
        "initial crowd violates the running constraint (Lambda = " +
        std::to_string(lambda0) + ")");
  }

  // Empirical hypothesis probes on the scenario ball.
  Rng rng = Rng(scenario.optimizer.seed).derive(7001);
  const double radius =
      1.5 * support_radius(scenario.crowd0.measure()) + 1.0;
  const int dim = 2 * d;
  const auto field_for = [&](const DiscreteMeasure& mu) {
    return crowd_field(PhaseMeasure(mu), scenario.leaders0, scenario.kernels);
  };
  const PointMap field0 = field_for(scenario.crowd0.measure());

  Mat samples(dim, 128);
  for (int k = 0; k < samples.cols(); ++k) {
    samples.col(k) = rng.uniform_vec(dim, -radius, radius);
  }
  HypothesisEstimates sub =
      probe_sublinearity(field0, scenario.crowd0.measure(), samples);

  Mat xs(dim, 64), ys(dim, 64);
  for (int k = 0; k < xs.cols(); ++k) {
    xs.col(k) = rng.uniform_vec(dim, -radius, radius);
    ys.col(k) = rng.uniform_vec(dim, -radius, radius);
  }
  const HypothesisEstimates lip = probe_lipschitz(field0, xs, ys);

  std::vector<DiscreteMeasure> jittered;
  jittered.push_back(scenario.crowd0.measure());
  for (int j = 0; j < 3; ++j) {
    Mat pts = scenario.crowd0.measure().points();
    for (int i = 0; i < pts.cols(); ++i) {
      pts.col(i) += 0.05 * rng.normal_vec(dim);
    }
    jittered.emplace_back(std::move(pts), scenario.crowd0.measure().weights());
  }
  const HypothesisEstimates wlip =
      probe_lipschitz_measures(field_for, jittered, samples.leftCols(32));

  sub.lK_hat = lip.lK_hat;
  sub.LK_hat = wlip.LK_hat;
  sub.violation = sub.violation || lip.violation || wlip.violation;
  sub.skipped_pairs = lip.skipped_pairs + wlip.skipped_pairs;
  problem.probes = sub;
  return problem;
}

RelaxedControl default_relaxed_control(const EvacScenario& scenario) {
  const Vec steer = aim_control(scenario, 0.5 * scenario.congestion.C);
  const Vec idle = Vec::Zero(steer.size());
  Vec lambda(2);
  lambda << 1.0 / 3.0, 2.0 / 3.0;
  return RelaxedControl::constant_weights({steer, idle}, lambda,
                                          scenario.grid.steps);
}

}  // namespace wassflow
