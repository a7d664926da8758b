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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bellstat/bell_statistics.hpp"
#include "bellstat/monte_carlo.hpp"
#include "bellstat/noise_kernel.hpp"
#include "bellstat/quantum.hpp"
#include "bellstat/random_models.hpp"

namespace bellstat::selfcheck {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace detail

/// max |sum_k' p~(k1 | k') p(k' | k2) - delta(k1, k2)| over a gamma grid.
inline SuiteResult kernel_composition() {
  double worst = 0.0;
  for (int i = -20; i <= 20; ++i) {
    if (i == 0) continue;
    const double g = i / 20.0;
    const KernelMatrix2 product = inverse_kernel_matrix(g) * forward_kernel_matrix(g);
    for (int k1 : {1, -1})
      for (int k2 : {1, -1}) worst = std::max(worst, std::abs(product(k1, k2) - (k1 == k2 ? 1.0 : 0.0)));
  }
  return {"kernel-composition", worst < 1e-12, "max residual " + detail::fmt(worst)};
}

/// Column stochasticity, unbiasedness, mean contraction and variance growth.
inline SuiteResult forward_kernel_properties() {
  double worst = 0.0;
  bool ok = true;
  for (int i = -20; i <= 20; ++i) {
    const double g = i / 20.0;
    const KernelMatrix2 k = forward_kernel_matrix(g);
    ok = ok && k.is_nonnegative();
    worst = std::max({worst, std::abs(k.column_sum(1) - 1.0), std::abs(k.column_sum(-1) - 1.0)});
    const auto uniform = apply_noise(BinaryDistribution::uniform(), g);
    worst = std::max(worst, std::abs(uniform.p_plus() - 0.5));
    for (int j = 0; j <= 20; ++j) {
      const BinaryDistribution p(j / 20.0, 1.0 - j / 20.0);
      const BinaryDistribution noisy = apply_noise(p, g);
      worst = std::max(worst, std::abs(noisy.mean() - g * p.mean()));
      ok = ok && noisy.variance() >= p.variance() - 1e-15;
    }
  }
  return {"forward-kernel", ok && worst < 1e-12, "max residual " + detail::fmt(worst)};
}

inline SuiteResult joint_round_trip(int samples = 100) {
  SplitMix64 rng(0x5EEDULL);
  double worst = 0.0;
  for (double g : {0.5, std::numbers::sqrt2 / 2.0, 0.8, 0.9}) {
    // Equal gammas above 1/sqrt2 are infeasible; pair each with the largest
    // partner the per-party constraint allows.
    const double partner = std::min(g, std::sqrt(1.0 - g * g));
    const GammaFactors gammas(g, partner, g, partner);
    for (int s = 0; s < samples; ++s) {
      const JointDistribution16 p = random_joint(rng);
      const auto back = apply_joint_noise(invert_joint(p, gammas).values(), gammas);
      const auto forth = invert_joint(apply_joint_noise(p, gammas), gammas);
      for (std::size_t i = 0; i < kOutcomeCount; ++i)
        worst = std::max({worst, std::abs(back[i] - p[i]), std::abs(forth[i] - p[i])});
    }
  }
  return {"joint-round-trip", worst <= 1e-12, "max residual " + detail::fmt(worst)};
}

/// Marginals, cross-party correlators and the mean of s' of the explicit
/// POVM against the noise-kernel relations, on random states and settings.
inline SuiteResult quantum_consistency(int samples = 200) {
  SplitMix64 rng(0xC0FFEEULL);
  double worst = 0.0;
  constexpr std::array<Observable, 4> all{Observable::kX, Observable::kY, Observable::kU, Observable::kV};
  for (int s = 0; s < samples; ++s) {
    const TwoQubitState state = random_state(rng);
    // Orthogonal within-party pairs keep every gamma with g^2 <= 1/2 feasible.
    const Vec3 a = random_unit_vector(rng);
    Vec3 a_perp = random_unit_vector(rng);
    const double d = bellstat::detail::dot(a, a_perp);
    for (std::size_t i = 0; i < 3; ++i) a_perp[i] -= d * a[i];
    const double nrm = bellstat::detail::norm(a_perp);
    for (auto& c : a_perp) c /= nrm;
    const MeasurementSettings settings(a, a_perp, MeasurementSettings::chsh_optimal().b_u(),
                                       MeasurementSettings::chsh_optimal().b_v());
    const double g = 0.2 + 0.5 * rng.uniform();
    const auto gammas = GammaFactors::equal(g);
    const JointDistribution16 joint = noisy_joint_distribution(state, settings, gammas);
    for (Observable k : all) {
      const auto expected = apply_noise(exact_marginal(state, settings, k), g);
      worst = std::max(worst, std::abs(marginal_of(joint, k).p_plus() - expected.p_plus()));
    }
    const Correlators c = correlators(state, settings);
    worst = std::max({worst, std::abs(pair_correlation(joint.values(), Observable::kX, Observable::kU) - g * g * c.xu),
                      std::abs(pair_correlation(joint.values(), Observable::kY, Observable::kV) - g * g * c.yv)});
    worst = std::max(worst, std::abs(mean_s(joint.values()) - g * g * c.chsh()));
  }
  return {"quantum-consistency", worst <= 1e-10, "max residual " + detail::fmt(worst)};
}

inline SuiteResult tsirelson(int samples = 1000) {
  SplitMix64 rng(0x7515ULL);
  double largest = 0.0;
  for (int s = 0; s < samples; ++s) {
    largest = std::max(largest, std::abs(chsh_value(random_state(rng), random_settings(rng))));
  }
  largest = std::max(largest, chsh_value(TwoQubitState::singlet(), MeasurementSettings::chsh_optimal()));
  return {"tsirelson", largest <= 2.0 * std::numbers::sqrt2 + 1e-9, "max |S| " + std::to_string(largest)};
}

inline SuiteResult s_dichotomy() {
  bool ok = true;
  for (std::size_t i = 0; i < kOutcomeCount; ++i) {
    const int s = s_of_outcome(Outcome4::from_index(i));
    ok = ok && (s == 2 || s == -2);
  }
  return {"s-dichotomy", ok, "16 outcomes"};
}

inline SuiteResult single_trial_universality() {
  int failures = 0;
  for (int gi = 1; gi <= 9; ++gi) {
    const double g = std::sqrt(gi / 10.0);
    for (int si = -20; si <= 20; ++si) {
      const double s = si / 20.0 * 2.0 * std::numbers::sqrt2;
      if (std::abs(g * g * s) > 2.0) continue;
      if (exact_violation_probability(1, s, g) != 1.0) ++failures;
    }
  }
  return {"single-trial-universality", failures == 0, std::to_string(failures) + " failures"};
}

inline SuiteResult pmf_normalization() {
  double worst = 0.0;
  for (std::int64_t n_trials : {1, 10, 1000, 10000}) {
    for (double p : {0.5, 0.853553, 0.99, 0.0, 1.0}) {
      std::vector<std::int64_t> all(static_cast<std::size_t>(n_trials) + 1);
      for (std::int64_t n = 0; n <= n_trials; ++n) all[static_cast<std::size_t>(n)] = n;
      worst = std::max(worst, std::abs(pmf_mass(n_trials, SPrimeDistribution(p, 1.0 - p), all) - 1.0));
    }
  }
  return {"pmf-normalization", worst <= 1e-12, "max residual " + detail::fmt(worst)};
}

inline SuiteResult route_equivalence() {
  int mismatches = 0;
  int checked = 0;
  for (std::int64_t n_trials : {1, 2, 7, 10, 100, 1000}) {
    for (double s : {0.0, 1.0, 2.0, 2.5, 2.0 * std::numbers::sqrt2, -2.0}) {
      for (double g2 : {0.1, 0.3, 0.5, 0.7, 1.0}) {
        const double g = std::sqrt(g2);
        if (std::abs(g2 * s) > 2.0) continue;
        ++checked;
        if (!route_equivalence_check(n_trials, s, g)) ++mismatches;
      }
    }
  }
  return {"route-equivalence", mismatches == 0,
          std::to_string(mismatches) + " mismatches on " + std::to_string(checked) + " points"};
}

inline SuiteResult negativity_criterion() {
  int mismatches = 0;
  for (int i = 0; i <= 400; ++i) {
    const double s = -4.0 + 8.0 * i / 400.0;
    if (s_quasi_distribution(s).has_negative_entry() != (std::abs(s) > 2.0)) ++mismatches;
  }
  return {"negativity-criterion", mismatches == 0, std::to_string(mismatches) + " mismatches on 401 S values"};
}

inline SuiteResult simulation_determinism() {
  SimulationSpec spec;
  spec.trials = 50;
  spec.reps = 2000;
  spec.seed = 42;
  spec.source = s_prime_distribution(2.0, std::numbers::sqrt2 / 2.0);
  const double g = std::numbers::sqrt2 / 2.0;
  const auto one = estimate_violation_rate(spec, g, 1);
  const auto four = estimate_violation_rate(spec, g, 4);
  const auto again = estimate_violation_rate(spec, g, 1);
  return {"simulation-determinism", one == four && one == again, "rate " + std::to_string(one.empirical_violation_rate)};
}

inline std::vector<std::function<SuiteResult()>> all_suites() {
  return {kernel_composition,
          forward_kernel_properties,
          [] { return joint_round_trip(); },
          [] { return quantum_consistency(); },
          [] { return tsirelson(); },
          s_dichotomy,
          single_trial_universality,
          pmf_normalization,
          route_equivalence,
          negativity_criterion,
          simulation_determinism};
}

}  // namespace bellstat::selfcheck
