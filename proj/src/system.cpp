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

#include "wassflow/system.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace wassflow {

ControlSetSpec ControlSetSpec::finite(std::vector<Vec> atom_list) {
  ControlSetSpec spec;
  spec.kind = Kind::kAtoms;
  spec.atoms = std::move(atom_list);
  spec.validate();
  return spec;
}

ControlSetSpec ControlSetSpec::box(Vec bounds) {
  ControlSetSpec spec;
  spec.kind = Kind::kBox;
  spec.box_bounds = std::move(bounds);
  spec.validate();
  return spec;
}

ControlSetSpec ControlSetSpec::block_norm_ball(Vec bounds, int block_size) {
  ControlSetSpec spec;
  spec.kind = Kind::kBlockNormBall;
  spec.block_bounds = std::move(bounds);
  spec.block_size = block_size;
  spec.validate();
  return spec;
}

void ControlSetSpec::validate() const {
  switch (kind) {
    case Kind::kAtoms:
      if (atoms.empty()) throw std::invalid_argument("empty control atom list");
      for (const auto& a : atoms) {
        if (a.size() != atoms.front().size()) {
          throw std::invalid_argument("control atoms of mixed dimension");
        }
      }
      break;
    case Kind::kBox:
      if (box_bounds.size() < 1 || (box_bounds.array() < 0).any()) {
        throw std::invalid_argument("box bounds must be nonnegative");
      }
      break;
    case Kind::kBlockNormBall:
      if (block_size < 1 || block_bounds.size() < 1 ||
          (block_bounds.array() < 0).any()) {
        throw std::invalid_argument("block norm bounds must be nonnegative");
      }
      break;
  }
}

int ControlSetSpec::dim() const {
  switch (kind) {
    case Kind::kAtoms:
      return static_cast<int>(atoms.front().size());
    case Kind::kBox:
      return static_cast<int>(box_bounds.size());
    case Kind::kBlockNormBall:
      return block_size * static_cast<int>(block_bounds.size());
  }
  return 0;
}

bool ControlSetSpec::contains(const Vec& u, double tol) const {
  if (u.size() != dim()) return false;
  switch (kind) {
    case Kind::kAtoms: {
      for (const auto& a : atoms) {
        if ((u - a).norm() <= tol) return true;
      }
      return false;
    }
    case Kind::kBox:
      return (u.cwiseAbs() - box_bounds).maxCoeff() <= tol;
    case Kind::kBlockNormBall: {
      for (int b = 0; b < block_bounds.size(); ++b) {
        if (u.segment(b * block_size, block_size).norm() >
            block_bounds[b] + tol) {
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

Vec ControlSetSpec::project(const Vec& u) const {
  if (u.size() != dim()) {
    throw std::invalid_argument("control dimension mismatch in projection");
  }
  switch (kind) {
    case Kind::kAtoms: {
      double best = std::numeric_limits<double>::infinity();
      const Vec* pick = &atoms.front();
      for (const auto& a : atoms) {
        const double d = (u - a).norm();
        if (d < best) {
          best = d;
          pick = &a;
        }
      }
      return *pick;
    }
    case Kind::kBox:
      return u.cwiseMax(-box_bounds).cwiseMin(box_bounds);
    case Kind::kBlockNormBall: {
      Vec out = u;
      for (int b = 0; b < block_bounds.size(); ++b) {
        auto seg = out.segment(b * block_size, block_size);
        const double norm = seg.norm();
        if (norm > block_bounds[b]) {
          seg *= (norm > 0.0) ? block_bounds[b] / norm : 0.0;
        }
      }
      return out;
    }
  }
  return u;
}

RelaxedControl RelaxedControl::constant_weights(std::vector<Vec> atom_list,
                                                const Vec& lambda, int steps) {
  RelaxedControl rc;
  rc.atoms = std::move(atom_list);
  rc.weights.assign(steps, lambda);
  rc.validate();
  return rc;
}

void RelaxedControl::validate() const {
  if (atoms.empty()) throw std::invalid_argument("relaxed control needs atoms");
  for (const auto& a : atoms) {
    if (a.size() != atoms.front().size()) {
      throw std::invalid_argument("relaxed control atoms of mixed dimension");
    }
  }
  for (const auto& lambda : weights) {
    if (lambda.size() != static_cast<Eigen::Index>(atoms.size())) {
      throw std::invalid_argument("weight vector length differs from atom count");
    }
    if ((lambda.array() < 0).any()) {
      throw std::invalid_argument("relaxed weights must be nonnegative");
    }
    if (std::abs(lambda.sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("relaxed weights must sum to 1 within 1e-12");
    }
  }
}

}  // namespace wassflow
