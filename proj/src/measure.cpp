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

#include "wassflow/measure.hpp"

#include <cmath>
#include <utility>

namespace wassflow {

DiscreteMeasure::DiscreteMeasure(Mat points, Vec weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw std::invalid_argument("measure needs dim >= 1 and at least one atom");
  }
  if (weights_.size() != points_.cols()) {
    throw std::invalid_argument("weight count does not match atom count");
  }
  if (!points_.allFinite() || !weights_.allFinite()) {
    throw std::invalid_argument("measure has non-finite entries");
  }
  if ((weights_.array() <= 0.0).any()) {
    throw std::invalid_argument("all weights must be positive");
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw std::invalid_argument("weights sum to " + std::to_string(total) +
                                ", expected 1 within 1e-12");
  }
}

DiscreteMeasure DiscreteMeasure::dirac(const Vec& x) {
  Mat p(x.size(), 1);
  p.col(0) = x;
  return DiscreteMeasure(std::move(p), Vec::Ones(1));
}

DiscreteMeasure DiscreteMeasure::uniform(Mat points) {
  const auto n = points.cols();
  return DiscreteMeasure(std::move(points), Vec::Constant(n, 1.0 / static_cast<double>(n)));
}

DiscreteMeasure DiscreteMeasure::renormalized(Mat points, Vec weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("cannot renormalize weights with non-positive total");
  }
  return DiscreteMeasure(std::move(points), weights / total);
}

double momentum(const DiscreteMeasure& mu) {
  return mu.weights().dot(mu.points().colwise().norm().transpose());
}

double support_radius(const DiscreteMeasure& mu) {
  return mu.points().colwise().norm().maxCoeff();
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu,
                            const std::function<Vec(const Vec&)>& f) {
  Mat out(mu.dim(), mu.size());
  for (int i = 0; i < mu.size(); ++i) {
    const Vec y = f(mu.points().col(i));
    if (y.size() != out.rows()) {
      throw std::invalid_argument("pushforward map changed the dimension");
    }
    out.col(i) = y;
  }
  return DiscreteMeasure(std::move(out), mu.weights());
}

DiscreteMeasure translate(const DiscreteMeasure& mu, const Vec& shift) {
  if (shift.size() != mu.dim()) {
    throw std::invalid_argument("translation dimension mismatch");
  }
  return DiscreteMeasure(mu.points().colwise() + shift, mu.weights());
}

double integrate(const DiscreteMeasure& mu,
                 const std::function<double(const Vec&)>& f) {
  double acc = 0.0;
  for (int i = 0; i < mu.size(); ++i) acc += mu.weights()[i] * f(mu.points().col(i));
  return acc;
}

PhaseMeasure::PhaseMeasure(DiscreteMeasure m) : measure_(std::move(m)) {
  if (measure_.dim() % 2 != 0) {
    throw std::invalid_argument("phase measure needs an even ambient dimension");
  }
}

DiscreteMeasure project_positions(const DiscreteMeasure& mu, int position_dim) {
  if (position_dim <= 0 || position_dim > mu.dim()) {
    throw std::invalid_argument("invalid position block size");
  }
  if (position_dim == mu.dim()) return mu;
  return DiscreteMeasure(mu.points().topRows(position_dim), mu.weights());
}

}  // namespace wassflow
