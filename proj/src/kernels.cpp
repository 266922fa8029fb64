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

#include "wassflow/kernels.hpp"

#include <cmath>

#include "wassflow/transport.hpp"

namespace wassflow {

void KernelParams::validate() const {
  if (morse.R1 < 0 || morse.R2 < 0 || morse.A1 < 0 || morse.A2 < 0 ||
      cs.K < 0 || cs.beta < 0) {
    throw std::invalid_argument("kernel constants must be nonnegative");
  }
  if (morse.R1 > 0 && morse.R2 <= 0) {
    throw std::invalid_argument("Morse R2 must be positive when R1 > 0");
  }
  if (morse.A1 > 0 && morse.A2 <= 0) {
    throw std::invalid_argument("Morse A2 must be positive when A1 > 0");
  }
  if (cs.sigma <= 0) {
    throw std::invalid_argument("Cucker-Smale sigma must be positive");
  }
  if (mollifier.radius <= 0) {
    throw std::invalid_argument("mollifier radius must be positive");
  }
}

Vec cs_kernel(const Vec& x, const Vec& v, const CuckerSmaleParams& p) {
  const double gain = p.K / std::pow(p.sigma + x.norm(), 2.0 * p.beta);
  return -gain * v;
}

double morse_multiplier(double r, const MorseParams& p) {
  double mult = 0.0;
  if (p.R1 > 0) mult += p.R1 * std::exp(-r / p.R2);
  if (p.A1 > 0) mult -= p.A1 * std::exp(-r / p.A2);
  return mult;
}

Vec morse_kernel(const Vec& x, const Vec& v, const MorseParams& p,
                 MorseVariant variant) {
  const double r = x.norm();
  const double mult = morse_multiplier(r, p);
  if (variant == MorseVariant::kAsWritten) return mult * v;
  if (r == 0.0) return Vec::Zero(x.size());
  return (mult / r) * x;
}

namespace {

// Integral of exp(-1/(1-s^2)) s^{d-1} over [0,1] by composite Simpson,
// refined until successive grids agree to 1e-8 (relative).
double radial_bump_integral(int dim) {
  auto f = [dim](double s) {
    const double t = 1.0 - s * s;
    if (t <= 0.0) return 0.0;
    return std::exp(-1.0 / t) * std::pow(s, dim - 1);
  };
  double prev = 0.0;
  for (int cells = 64;; cells *= 2) {
    const double h = 1.0 / cells;
    double acc = f(0.0) + f(1.0);
    for (int k = 1; k < cells; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
    const double integral = acc * h / 3.0;
    if (cells > 64 && std::abs(integral - prev) <= 1e-8 * std::abs(integral)) {
      return integral;
    }
    prev = integral;
    if (cells > (1 << 22)) throw SolverError("mollifier quadrature stalled");
  }
}

double unit_sphere_area(int dim) {
  // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
  const double pi = 3.14159265358979323846;
  return 2.0 * std::pow(pi, dim / 2.0) / std::tgamma(dim / 2.0);
}

}  // namespace

Mollifier::Mollifier(double radius, int dim) : radius_(radius), dim_(dim) {
  if (radius <= 0 || dim < 1) {
    throw std::invalid_argument("mollifier needs radius > 0 and dim >= 1");
  }
  const double mass = unit_sphere_area(dim) * radial_bump_integral(dim) *
                      std::pow(radius, dim);
  scale_ = 1.0 / mass;
}

double Mollifier::peak() const { return scale_ * std::exp(-1.0); }

double Mollifier::operator()(const Vec& z) const {
  const double s = z.norm() / radius_;
  const double t = 1.0 - s * s;
  if (t <= 0.0) return 0.0;
  return scale_ * std::exp(-1.0 / t);
}

double mollifier_density(const DiscreteMeasure& mu, const Vec& y,
                         const Mollifier& rho) {
  if (y.size() != mu.dim()) {
    throw std::invalid_argument("mollifier_density: dimension mismatch");
  }
  double acc = 0.0;
  for (int j = 0; j < mu.size(); ++j) {
    acc += mu.weights()[j] * rho(y - mu.points().col(j));
  }
  return acc;
}

Vec convolve_field(const PhaseKernel& kernel, const PhaseMeasure& mu,
                   const Vec& x, const Vec& v) {
  const int d = mu.space_dim();
  if (x.size() != d || v.size() != d) {
    throw std::invalid_argument("convolve_field: dimension mismatch");
  }
  Vec acc = Vec::Zero(d);
  for (int j = 0; j < mu.size(); ++j) {
    const Vec contribution =
        kernel(x - mu.positions().col(j), v - mu.velocities().col(j));
    if (contribution.size() != d) {
      throw std::invalid_argument("convolve_field: kernel output dimension mismatch");
    }
    acc += mu.measure().weights()[j] * contribution;
  }
  return acc;
}

HypothesisEstimates probe_sublinearity(const PointMap& field,
                                       const DiscreteMeasure& mu,
                                       const Mat& samples) {
  if (samples.cols() < 1) {
    throw std::invalid_argument("probe_sublinearity needs at least one sample");
  }
  HypothesisEstimates est;
  const double m1 = momentum(mu);
  for (int k = 0; k < samples.cols(); ++k) {
    const Vec x = samples.col(k);
    const Vec val = field(x);
    if (!val.allFinite()) {
      est.violation = true;
      est.note = "non-finite field value at sample " + std::to_string(k);
      continue;
    }
    est.m_hat = std::max(est.m_hat, val.norm() / (1.0 + x.norm() + m1));
  }
  return est;
}

HypothesisEstimates probe_lipschitz(const PointMap& field, const Mat& xs,
                                    const Mat& ys) {
  if (xs.cols() != ys.cols() || xs.rows() != ys.rows()) {
    throw std::invalid_argument("probe_lipschitz: sample shape mismatch");
  }
  HypothesisEstimates est;
  for (int k = 0; k < xs.cols(); ++k) {
    const double gap = (xs.col(k) - ys.col(k)).norm();
    if (gap < 1e-14) {
      ++est.skipped_pairs;
      continue;
    }
    const Vec dv = field(xs.col(k)) - field(ys.col(k));
    if (!dv.allFinite()) {
      est.violation = true;
      est.note = "non-finite field value at pair " + std::to_string(k);
      continue;
    }
    est.lK_hat = std::max(est.lK_hat, dv.norm() / gap);
  }
  return est;
}

HypothesisEstimates probe_lipschitz_measures(
    const std::function<PointMap(const DiscreteMeasure&)>& family,
    const std::vector<DiscreteMeasure>& measures, const Mat& sample_points) {
  HypothesisEstimates est;
  std::vector<PointMap> fields;
  fields.reserve(measures.size());
  for (const auto& mu : measures) fields.push_back(family(mu));
  for (std::size_t a = 0; a < measures.size(); ++a) {
    for (std::size_t b = a + 1; b < measures.size(); ++b) {
      const double dist = w1_value(measures[a], measures[b]);
      if (dist < 1e-14) {
        ++est.skipped_pairs;
        continue;
      }
      double sup = 0.0;
      for (int k = 0; k < sample_points.cols(); ++k) {
        const Vec diff =
            fields[a](sample_points.col(k)) - fields[b](sample_points.col(k));
        if (!diff.allFinite()) {
          est.violation = true;
          est.note = "non-finite field value";
          continue;
        }
        sup = std::max(sup, diff.norm());
      }
      est.LK_hat = std::max(est.LK_hat, sup / dist);
    }
  }
  return est;
}

}  // namespace wassflow
