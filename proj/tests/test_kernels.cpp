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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wassflow/kernels.hpp"

using namespace wassflow;
using wassflow::testing::power_iteration_sigma_max;
using wassflow::testing::random_measure;

namespace {

PhaseMeasure random_phase(Rng& rng, int d, int atoms) {
  Mat pts(2 * d, atoms);
  for (int i = 0; i < atoms; ++i) {
    pts.col(i) = rng.uniform_vec(2 * d, -1.0, 1.0);
  }
  return PhaseMeasure(DiscreteMeasure::uniform(std::move(pts)));
}

}  // namespace

TEST_CASE("cucker-smale kernel evaluates the printed formula") {
  Vec v(2);
  v << 1, 2;
  CuckerSmaleParams p{1.0, 1.0, 0.7};
  CHECK((cs_kernel(Vec::Zero(2), v, p) + v).norm() == doctest::Approx(0.0));

  CHECK(cs_kernel(Vec::Ones(2), Vec::Zero(2), p).norm() == 0.0);

  // |x| = 1, K = 2, sigma = 1, beta = 1, v = e1 -> -v/2
  Vec x(2), e1(2);
  x << 1, 0;
  e1 << 1, 0;
  CuckerSmaleParams q{2.0, 1.0, 1.0};
  const Vec out = cs_kernel(x, e1, q);
  CHECK(out[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(out[1] == 0.0);
}

TEST_CASE("morse kernel variants") {
  MorseParams p{0.5, 0.5, 1.0, 1.0};
  Vec v(2);
  v << 2, -1;

  // x = 0, as written: (R1 - A1) v
  const Vec at0 = morse_kernel(Vec::Zero(2), v, p, MorseVariant::kAsWritten);
  CHECK((at0 - (p.R1 - p.A1) * v).norm() == doctest::Approx(0.0));

  // equal amplitudes and ranges cancel everywhere
  MorseParams cancel{0.7, 0.9, 0.7, 0.9};
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = rng.uniform_vec(2, -3.0, 3.0);
    CHECK(morse_kernel(x, v, cancel, MorseVariant::kAsWritten).norm() ==
          doctest::Approx(0.0));
  }

  // R1=1, R2=1, A1=0, |x|=1, v=e2: (0, e^{-1})
  MorseParams pure{1.0, 1.0, 0.0, 1.0};
  Vec x(2), e2(2);
  x << 1, 0;
  e2 << 0, 1;
  const Vec out = morse_kernel(x, e2, pure, MorseVariant::kAsWritten);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  // positional variant acts along x/|x| and vanishes at the origin
  const Vec pos0 = morse_kernel(Vec::Zero(2), v, p, MorseVariant::kPositional);
  CHECK(pos0.norm() == 0.0);
  const Vec pos = morse_kernel(x, v, pure, MorseVariant::kPositional);
  CHECK(pos[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(pos[1] == 0.0);
}

TEST_CASE("kernel params validation") {
  KernelParams p;
  CHECK_NOTHROW(p.validate());
  p.cs.sigma = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = KernelParams{};
  p.morse.R1 = 1.0;
  p.morse.R2 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = KernelParams{};
  p.mollifier.radius = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("mollifier normalizes, peaks at zero and cuts off") {
  const Mollifier rho(0.5, 2);
  CHECK(rho(Vec::Zero(2)) == doctest::Approx(rho.peak()));
  Vec far(2);
  far << 0.5, 0.0;
  CHECK(rho(far) == 0.0);

  // unit mass: midpoint grid quadrature within 1e-3
  double integral = 0.0;
  const int cells = 400;
  const double h = 1.2 / cells;
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      Vec z(2);
      z << -0.6 + (i + 0.5) * h, -0.6 + (j + 0.5) * h;
      integral += rho(z) * h * h;
    }
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));

  // density: dirac at the query point gives the peak, far atoms give zero
  const DiscreteMeasure dirac = DiscreteMeasure::dirac(Vec::Ones(2));
  CHECK(mollifier_density(dirac, Vec::Ones(2), rho) ==
        doctest::Approx(rho.peak()));
  CHECK(mollifier_density(dirac, Vec::Zero(2), rho) == 0.0);

  // straddling pair matches the per-atom oracle
  Mat pts(2, 2);
  pts << 0.1, 0.9, 0.0, 0.0;
  Vec w(2);
  w << 0.25, 0.75;
  const DiscreteMeasure pair(pts, w);
  Vec y(2);
  y << 0.3, 0.0;
  double by_hand = 0.0;
  for (int i = 0; i < 2; ++i) by_hand += w[i] * rho(y - pts.col(i));
  CHECK(mollifier_density(pair, y, rho) ==
        doctest::Approx(by_hand).epsilon(1e-15));
}

TEST_CASE("convolve_field matches a per-atom loop and is linear") {
  Rng rng(2);
  const int d = 2;
  const CuckerSmaleParams cs{1.0, 1.0, 0.5};
  const PhaseKernel kernel = [cs](const Vec& dx, const Vec& dv) {
    return cs_kernel(dx, dv, cs);
  };

  // dirac: the kernel at the offset
  Mat one(4, 1);
  one << 0.5, -0.2, 0.1, 0.3;
  const PhaseMeasure dirac{DiscreteMeasure::uniform(one)};
  Vec x(2), v(2);
  x << 1, 1;
  v << 0, 2;
  const Vec got = convolve_field(kernel, dirac, x, v);
  const Vec want = kernel(x - one.col(0).head(2), v - one.col(0).tail(2));
  CHECK((got - want).norm() == doctest::Approx(0.0));

  // odd kernel, symmetric two-atom measure, evaluated half-way: cancels
  Mat sym(4, 2);
  sym << 1, -1, 0, 0, 0.5, -0.5, 0, 0;
  const PhaseMeasure sym_measure{DiscreteMeasure::uniform(sym)};
  const Vec cancel = convolve_field(kernel, sym_measure, Vec::Zero(2), Vec::Zero(2));
  CHECK(cancel.norm() <= 1e-15);

  // 3-atom measure against the independent loop
  const PhaseMeasure mu = random_phase(rng, d, 3);
  Vec acc = Vec::Zero(d);
  for (int j = 0; j < mu.size(); ++j) {
    acc += mu.measure().weights()[j] *
           kernel(x - mu.positions().col(j), v - mu.velocities().col(j));
  }
  CHECK((convolve_field(kernel, mu, x, v) - acc).norm() <= 1e-12);

  // linearity: convex combination of measures = combination of fields
  const PhaseMeasure nu = random_phase(rng, d, 4);
  const double alpha = 0.3;
  Mat mix_pts(2 * d, mu.size() + nu.size());
  mix_pts << mu.measure().points(), nu.measure().points();
  Vec mix_w(mu.size() + nu.size());
  mix_w << alpha * mu.measure().weights(), (1 - alpha) * nu.measure().weights();
  const PhaseMeasure mix{DiscreteMeasure(mix_pts, mix_w)};
  const Vec lhs = convolve_field(kernel, mix, x, v);
  const Vec rhs = alpha * convolve_field(kernel, mu, x, v) +
                  (1 - alpha) * convolve_field(kernel, nu, x, v);
  CHECK((lhs - rhs).norm() <= 1e-12);
}

TEST_CASE("kernels stay finite on the scenario ball") {
  Rng rng(3);
  const KernelParams params;
  for (int trial = 0; trial < 500; ++trial) {
    const Vec x = rng.uniform_vec(2, -5.0, 5.0);
    const Vec v = rng.uniform_vec(2, -5.0, 5.0);
    CHECK(cs_kernel(x, v, params.cs).allFinite());
    CHECK(morse_kernel(x, v, params.morse, MorseVariant::kAsWritten).allFinite());
    CHECK(morse_kernel(x, v, params.morse, MorseVariant::kPositional).allFinite());
  }
}

TEST_CASE("sublinearity probe") {
  const PointMap zero = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  Rng rng(4);
  Mat samples(2, 50);
  for (int k = 0; k < 50; ++k) samples.col(k) = rng.uniform_vec(2, -10.0, 10.0);
  const DiscreteMeasure mu = DiscreteMeasure::dirac(Vec::Zero(2));

  CHECK(probe_sublinearity(zero, mu, samples).m_hat == 0.0);

  const PointMap identity = [](const Vec& x) { return x; };
  const HypothesisEstimates est = probe_sublinearity(identity, mu, samples);
  double expected = 0.0;
  for (int k = 0; k < 50; ++k) {
    expected = std::max(expected, samples.col(k).norm() /
                                      (1.0 + samples.col(k).norm()));
  }
  CHECK(est.m_hat == doctest::Approx(expected).epsilon(1e-14));
  CHECK(est.m_hat < 1.0);
  CHECK_FALSE(est.violation);

  const PointMap bad = [](const Vec& x) {
    Vec out = x;
    out[0] = std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  CHECK(probe_sublinearity(bad, mu, samples).violation);
}

TEST_CASE("lipschitz probe approximates the operator norm of a linear map") {
  Mat A(2, 2);
  A << 1.0, 2.0, -0.5, 0.7;
  const PointMap field = [A](const Vec& x) { return Vec(A * x); };

  Rng rng(5);
  const int pairs = 1500;
  Mat xs(2, pairs), ys(2, pairs);
  for (int k = 0; k < pairs; ++k) {
    xs.col(k) = rng.uniform_vec(2, -1.0, 1.0);
    ys.col(k) = rng.uniform_vec(2, -1.0, 1.0);
  }
  const HypothesisEstimates est = probe_lipschitz(field, xs, ys);
  const double sigma = power_iteration_sigma_max(A);
  CHECK(est.lK_hat <= sigma + 1e-12);
  CHECK(est.lK_hat >= 0.95 * sigma);

  const PointMap constant = [](const Vec&) {
    Vec out(2);
    out << 3, 4;
    return out;
  };
  CHECK(probe_lipschitz(constant, xs, ys).lK_hat == 0.0);

  // coincident pairs are skipped and counted
  Mat same = xs;
  const HypothesisEstimates skipped = probe_lipschitz(field, xs, same);
  CHECK(skipped.skipped_pairs == pairs);
}

TEST_CASE("measure-lipschitz probe is finite on convolution families") {
  Rng rng(6);
  const CuckerSmaleParams cs{1.0, 1.0, 0.5};
  const auto family = [cs](const DiscreteMeasure& mu) -> PointMap {
    return [mu, cs](const Vec& q) {
      const PhaseMeasure phase(mu);
      return convolve_field(
          [cs](const Vec& dx, const Vec& dv) { return cs_kernel(dx, dv, cs); },
          phase, q.head(2), q.tail(2));
    };
  };
  std::vector<DiscreteMeasure> measures;
  for (int i = 0; i < 4; ++i) {
    measures.push_back(random_phase(rng, 2, 5).measure());
  }
  Mat samples(4, 20);
  for (int k = 0; k < 20; ++k) samples.col(k) = rng.uniform_vec(4, -1.0, 1.0);
  const HypothesisEstimates est =
      probe_lipschitz_measures(family, measures, samples);
  CHECK(std::isfinite(est.LK_hat));
  CHECK(est.LK_hat > 0.0);
  CHECK_FALSE(est.violation);
}
