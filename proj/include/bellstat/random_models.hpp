// Copyright 2026 The bellstat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "bellstat/monte_carlo.hpp"
#include "bellstat/outcome.hpp"
#include "bellstat/quantum.hpp"

// Random states, settings and distributions for property checks.

namespace bellstat {

/// Standard normal draw (Box-Muller).
inline double standard_normal(SplitMix64& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Isotropic unit 3-vector.
inline Vec3 random_unit_vector(SplitMix64& rng) {
  for (;;) {
    Vec3 v{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    const double n = detail::norm(v);
    if (n < 1e-6) continue;
    return {v[0] / n, v[1] / n, v[2] / n};
  }
}

inline MeasurementSettings random_settings(SplitMix64& rng) {
  return {random_unit_vector(rng), random_unit_vector(rng), random_unit_vector(rng), random_unit_vector(rng)};
}

/// rho = G G^dagger / Tr[G G^dagger] with complex Gaussian G (Ginibre). Half
/// of the draws are replaced by a random pure state so entangled extremes are
/// well represented.
inline TwoQubitState random_state(SplitMix64& rng) {
  Matrix4 rho;
  if (rng.uniform() < 0.5) {
    std::array<Complex, 4> psi{};
    double norm2 = 0.0;
    for (auto& a : psi) {
      a = {standard_normal(rng), standard_normal(rng)};
      norm2 += std::norm(a);
    }
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) rho(r, c) = psi[r] * std::conj(psi[c]) / norm2;
  } else {
    Matrix4 g;
    for (auto& a : g.data) a = {standard_normal(rng), standard_normal(rng)};
    rho = g * g.adjoint();
    rho = rho * (1.0 / rho.trace().real());
  }
  // Symmetrize away rounding.
  rho = (rho + rho.adjoint()) * 0.5;
  return TwoQubitState(rho);
}

/// Random bona fide 16-outcome distribution (normalized exponentials).
inline JointDistribution16 random_joint(SplitMix64& rng) {
  JointDistribution16::Array p{};
  double total = 0.0;
  for (double& v : p) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    v = -std::log(u);
    total += v;
  }
  for (double& v : p) v /= total;
  return JointDistribution16(p);
}

}  // namespace bellstat
