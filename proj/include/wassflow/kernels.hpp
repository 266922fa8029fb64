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
#include <string>
#include <vector>

#include "wassflow/measure.hpp"
#include "wassflow/types.hpp"

namespace wassflow {

struct MorseParams {
  double R1 = 0.5;  // repulsion amplitude
  double R2 = 0.5;  // repulsion range
  double A1 = 1.0;  // attraction amplitude
  double A2 = 1.0;  // attraction range
};

struct CuckerSmaleParams {
  double K = 1.0;
  double sigma = 1.0;
  double beta = 0.5;
};

struct MollifierParams {
  double radius = 0.5;
};

/// The Morse interaction as printed multiplies the velocity argument; the
/// positional variant acts along the unit position offset instead (zero at
/// the origin), which is the classical gradient-of-a-potential reading.
enum class MorseVariant { kAsWritten, kPositional };

struct KernelParams {
  MorseParams morse;
  CuckerSmaleParams cs;
  MollifierParams mollifier;
  MorseVariant morse_variant = MorseVariant::kAsWritten;

  void validate() const;
};

/// Velocity-alignment kernel: -K / (sigma + |x|)^{2 beta} * v.
Vec cs_kernel(const Vec& x, const Vec& v, const CuckerSmaleParams& p);

/// Morse kernel: [R1 exp(-|x|/R2) - A1 exp(-|x|/A2)] applied to v
/// (kAsWritten) or to x/|x| (kPositional, zero at x = 0).
Vec morse_kernel(const Vec& x, const Vec& v, const MorseParams& p,
                 MorseVariant variant = MorseVariant::kAsWritten);

/// Scalar Morse multiplier R1 exp(-r/R2) - A1 exp(-r/A2) at distance r.
double morse_multiplier(double r, const MorseParams& p);

/// Smooth unit-mass bump supported on the ball of the given radius:
/// rho(z) = c * exp(-1 / (1 - |z/r|^2)) for |z| < r, 0 otherwise, with c
/// fixed once per (radius, dim) by deterministic quadrature so that the
/// integral over R^d equals 1.
class Mollifier {
 public:
  Mollifier(double radius, int dim);

  double operator()(const Vec& z) const;
  /// Value at the origin (the maximum), c e^{-1}.
  double peak() const;
  double radius() const { return radius_; }
  int dim() const { return dim_; }

 private:
  double radius_;
  int dim_;
  double scale_;  // normalisation constant c
};

/// Local density (rho * mu)(y) = sum_j w_j rho(y - x_j); `mu` holds the
/// position block only.
double mollifier_density(const DiscreteMeasure& mu, const Vec& y,
                         const Mollifier& rho);

/// Phase-space interaction kernel acting on (position offset, velocity
/// offset) pairs.
using PhaseKernel = std::function<Vec(const Vec&, const Vec&)>;

/// (K * mu)(x, v) = sum_j w_j K(x - x_j, v - v_j) over the atoms of a phase
/// measure.
Vec convolve_field(const PhaseKernel& kernel, const PhaseMeasure& mu,
                   const Vec& x, const Vec& v);

/// Pointwise velocity map produced by freezing a non-local field at one
/// measure/time.
using PointMap = std::function<Vec(const Vec&)>;

/// A non-local velocity field: a rule turning (t, mu) into a pointwise map.
using NonlocalField = std::function<PointMap(double, const DiscreteMeasure&)>;

/// Sampling-based estimates of the growth / Lipschitz constants appearing in
/// the sublinearity and Lipschitz hypotheses. These are upper bounds of the
/// true constants restricted to the sample set: they certify violations,
/// never global validity.
struct HypothesisEstimates {
  double m_hat = 0.0;   // sublinearity constant
  double lK_hat = 0.0;  // pointwise Lipschitz constant on the ball
  double LK_hat = 0.0;  // W1 Lipschitz constant of the measure dependence
  bool violation = false;
  int skipped_pairs = 0;
  std::string note;
};

/// Smallest constant m with |v(x)| <= m (1 + |x| + M1(mu)) over the samples
/// (columns of `samples`). Non-finite field values are flagged as violations.
HypothesisEstimates probe_sublinearity(const PointMap& field,
                                       const DiscreteMeasure& mu,
                                       const Mat& samples);

/// Largest difference quotient |v(x)-v(y)|/|x-y| over the given sample pairs
/// (matching columns of xs and ys). Coincident pairs are skipped and counted.
HypothesisEstimates probe_lipschitz(const PointMap& field, const Mat& xs,
                                    const Mat& ys);

/// Set-valued W1 Lipschitz estimate: max over measure pairs of the sup-norm
/// field distance on the sample points, divided by W1 between the measures.
HypothesisEstimates probe_lipschitz_measures(
    const std::function<PointMap(const DiscreteMeasure&)>& family,
    const std::vector<DiscreteMeasure>& measures, const Mat& sample_points);

}  // namespace wassflow
