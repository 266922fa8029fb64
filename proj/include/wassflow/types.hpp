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

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace wassflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when a numerical routine fails to produce a result (as opposed to
/// being handed invalid input, which raises std::invalid_argument).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic random source. mt19937_64 output is fully specified by the
/// standard; the bit-to-double mappings below avoid the implementation-defined
/// std::uniform_real_distribution, so identical seeds give identical streams
/// on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via Box-Muller (two draws per value).
  double normal() {
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  Vec uniform_vec(int n, double a, double b) {
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = uniform(a, b);
    return out;
  }

  Vec normal_vec(int n) {
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = normal();
    return out;
  }

  /// Independent substream; derive(k) != derive(k') for k != k'.
  Rng derive(std::uint64_t stream) const {
    return Rng(mix(seed_ + 0x9E3779B97F4A7C15ull * (stream + 1)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wassflow
