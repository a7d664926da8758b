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
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "bellstat/errors.hpp"
#include "bellstat/noise_kernel.hpp"
#include "bellstat/outcome.hpp"

namespace bellstat {

/// Relative snap applied when comparing a statistic with a bound, so that
/// values equal to the bound up to rounding count as non-violations.
inline constexpr double kBoundarySnap = 1e-12;

/// Value of s = xu - xv + yu + yv for a dichotomic outcome; always +2 or -2.
inline int s_of_outcome(const Outcome4& xi) {
  detail::require(xi.is_dichotomic(), "s_of_outcome: components must be +1 or -1");
  return xi.x * xi.u - xi.x * xi.v + xi.y * xi.u + xi.y * xi.v;
}

/// Mean of s over any 16-outcome weight vector.
inline double mean_s(const std::array<double, kOutcomeCount>& weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < kOutcomeCount; ++i) acc += s_of_outcome(Outcome4::from_index(i)) * weights[i];
  return acc;
}

/// Law of the two-valued noisy statistic s' in {+2, -2}.
class SPrimeDistribution {
 public:
  SPrimeDistribution(double p_plus2, double p_minus2) : p_plus2_(p_plus2), p_minus2_(p_minus2) {
    detail::require(std::isfinite(p_plus2) && std::isfinite(p_minus2), "s' distribution: non-finite entry");
    detail::require(p_plus2 >= -kNegativeFloor && p_minus2 >= -kNegativeFloor, "s' distribution: negative probability");
    detail::require(std::abs(p_plus2 + p_minus2 - 1.0) <= kSumTolerance, "s' distribution: does not sum to 1");
    p_plus2_ = std::clamp(p_plus2_, 0.0, 1.0);
    p_minus2_ = std::clamp(p_minus2_, 0.0, 1.0);
  }

  double p_plus2() const { return p_plus2_; }
  double p_minus2() const { return p_minus2_; }
  double mean() const { return 2.0 * (p_plus2_ - p_minus2_); }

 private:
  double p_plus2_;
  double p_minus2_;
};

/// p(s' = +-2) = 1/2 +- gamma^2 S / 4.
inline SPrimeDistribution s_prime_distribution(double s_param, double gamma) {
  detail::require_gamma(gamma);
  detail::require(std::isfinite(s_param), "S must be finite");
  const double contracted = gamma * gamma * s_param;
  detail::require(std::abs(contracted) <= 2.0 * (1.0 + kBoundarySnap),
                  "|gamma^2 S| > 2: the s' law would not be a probability");
  const double half_spread = std::clamp(contracted / 4.0, -0.5, 0.5);
  return {0.5 + half_spread, 0.5 - half_spread};
}

/// Finite-N statistics are defined for the equal-gamma convention only.
inline double common_gamma(const GammaFactors& gammas) {
  detail::require(gammas.is_equal(), "finite-N statistics require all four gamma factors to be equal");
  return gammas.gamma_x();
}

inline SPrimeDistribution s_prime_distribution(double s_param, const GammaFactors& gammas) {
  return s_prime_distribution(s_param, common_gamma(gammas));
}

/// Law of s' read off a full 16-outcome noisy distribution.
inline SPrimeDistribution s_prime_distribution_of(const JointDistribution16& joint) {
  double plus = 0.0;
  double minus = 0.0;
  for (std::size_t i = 0; i < kOutcomeCount; ++i) (s_of_outcome(Outcome4::from_index(i)) > 0 ? plus : minus) += joint[i];
  const double total = plus + minus;
  return {plus / total, minus / total};
}

/// Bell bound 2 gamma^2 for the noisy statistic.
inline double noisy_bound(double gamma) {
  detail::require_gamma(gamma);
  return 2.0 * gamma * gamma;
}

/// n outcomes s' = +2 out of N trials.
struct TrialCounts {
  std::int64_t n = 0;
  std::int64_t trials = 0;

  TrialCounts(std::int64_t n_plus, std::int64_t total) : n(n_plus), trials(total) {
    detail::require(total >= 0 && n_plus >= 0 && n_plus <= total, "trial counts: need 0 <= n <= N");
  }
};

namespace detail {

/// log(k!) - log(sqrt(2 pi k) (k / e)^k).
inline double stirling_error(double k) {
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  if (k <= 15.0) {
    if (k == 0.0) return 0.0;
    return std::lgamma(k + 1.0) - (k + 0.5) * std::log(k) + k - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  const double kk = k * k;
  if (k > 500.0) return (s0 - s1 / kk) / k;
  if (k > 80.0) return (s0 - (s1 - s2 / kk) / kk) / k;
  if (k > 35.0) return (s0 - (s1 - (s2 - s3 / kk) / kk) / kk) / k;
  return (s0 - (s1 - (s2 - (s3 - s4 / kk) / kk) / kk) / kk) / k;
}

/// x log(x / m) + m - x, without cancellation when x is close to m.
inline double deviance_term(double x, double m) {
  if (std::abs(x - m) < 0.1 * (x + m)) {
    double v = (x - m) / (x + m);
    double sum = (x - m) * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double next = sum + ej / (2 * j + 1);
      if (next == sum) return next;
      sum = next;
    }
    return sum;
  }
  return x * std::log(x / m) + m - x;
}

}  // namespace detail

/// log p(n | N) for p(n | N) = C(N, n) p+^n p-^(N - n), in the saddle-point
/// form (Stirling error terms plus deviances), which keeps full relative
/// precision for N up to 10^6 and beyond.
inline double log_binomial_pmf(const TrialCounts& counts, const SPrimeDistribution& dist) {
  const auto n = static_cast<double>(counts.n);
  const auto big_n = static_cast<double>(counts.trials);
  const double p = dist.p_plus2();
  const double q = dist.p_minus2();
  if (big_n == 0.0) return 0.0;
  if (p == 0.0) return n == 0.0 ? 0.0 : -INFINITY;
  if (q == 0.0) return n == big_n ? 0.0 : -INFINITY;
  if (n == 0.0) return p < 0.1 ? -detail::deviance_term(big_n, big_n * q) - big_n * p : big_n * std::log(q);
  if (n == big_n) return q < 0.1 ? -detail::deviance_term(big_n, big_n * p) - big_n * q : big_n * std::log(p);
  const double log_core = detail::stirling_error(big_n) - detail::stirling_error(n) -
                          detail::stirling_error(big_n - n) - detail::deviance_term(n, big_n * p) -
                          detail::deviance_term(big_n - n, big_n * q);
  const double log_width = std::log(2.0 * std::numbers::pi) + std::log(n) + std::log1p(-n / big_n);
  return log_core - 0.5 * log_width;
}

inline double binomial_pmf(const TrialCounts& counts, const SPrimeDistribution& dist) {
  return std::exp(log_binomial_pmf(counts, dist));
}

/// S'_N = 2 (2n / N - 1).
inline double finite_mean_noisy(const TrialCounts& counts) {
  detail::require(counts.trials > 0, "finite_mean_noisy: N must be positive");
  return 2.0 * (2.0 * static_cast<double>(counts.n) / static_cast<double>(counts.trials) - 1.0);
}

/// S_N = S'_N / gamma^2, the sample mean after noise removal.
inline double finite_mean_inverted(const TrialCounts& counts, double gamma) {
  detail::require_invertible(gamma);
  return finite_mean_noisy(counts) / (gamma * gamma);
}

/// True iff |statistic| > bound beyond rounding.
inline bool exceeds_bound(double statistic, double bound) {
  return std::abs(statistic) > bound + kBoundarySnap * std::max(1.0, std::abs(bound));
}

/// Window [n_c, n_f] of counts that do not violate the noisy bound. Empty
/// when n_c > n_f.
struct ViolationThresholds {
  std::int64_t n_c = 0;
  std::int64_t n_f = 0;

  bool empty() const { return n_c > n_f; }
  bool violates(std::int64_t n) const { return n < n_c || n > n_f; }
};

/// n_f = floor[N (1 + g^2) / 2], n_c = ceil[N (1 - g^2) / 2].
inline ViolationThresholds violation_thresholds(std::int64_t trials, double gamma) {
  detail::require(trials >= 1, "violation_thresholds: N must be >= 1");
  detail::require_gamma(gamma);
  const double half = 0.5 * static_cast<double>(trials);
  const double upper = half * (1.0 + gamma * gamma);
  const double lower = half * (1.0 - gamma * gamma);
  auto snap = [](double x) { return kBoundarySnap * std::max(1.0, std::abs(x)); };
  ViolationThresholds t;
  t.n_f = std::clamp(static_cast<std::int64_t>(std::floor(upper + snap(upper))), std::int64_t{0}, trials);
  t.n_c = std::clamp(static_cast<std::int64_t>(std::ceil(lower - snap(lower))), std::int64_t{0}, trials);
  return t;
}

/// Sum of p(n | N) over `counts_set`, accumulated in descending order of
/// magnitude (ties by ascending n) with Neumaier compensation. The order is
/// a function of the set alone, so equal sets give bit-identical sums.
inline double pmf_mass(std::int64_t trials, const SPrimeDistribution& dist, std::vector<std::int64_t> counts_set) {
  std::vector<std::pair<double, std::int64_t>> terms;
  terms.reserve(counts_set.size());
  for (std::int64_t n : counts_set) terms.emplace_back(binomial_pmf(TrialCounts(n, trials), dist), n);
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  double sum = 0.0;
  double compensation = 0.0;
  for (const auto& [value, n] : terms) {
    const double t = sum + value;
    compensation += std::abs(sum) >= std::abs(value) ? (sum - t) + value : (value - t) + sum;
    sum = t;
  }
  return sum + compensation;
}

namespace detail {

inline std::vector<std::int64_t> window_members(const ViolationThresholds& t) {
  std::vector<std::int64_t> members;
  for (std::int64_t n = t.n_c; n <= t.n_f; ++n) members.push_back(n);
  return members;
}

}  // namespace detail

/// Exact probability that the N-trial mean violates |S'_N| <= 2 gamma^2:
/// 1 - sum_{n_c}^{n_f} p(n | N). An empty window gives exactly 1.
inline double exact_violation_probability(std::int64_t trials, double s_param, double gamma) {
  const SPrimeDistribution dist = s_prime_distribution(s_param, gamma);
  const ViolationThresholds t = violation_thresholds(trials, gamma);
  if (t.empty()) return 1.0;
  return std::clamp(1.0 - pmf_mass(trials, dist, detail::window_members(t)), 0.0, 1.0);
}

/// Integration limits for the Gaussian approximation of the window mass.
enum class GaussianLimits {
  /// [n_c - 1/2, n_f + 1/2]: the continuous extent of the integer window.
  kContinuityCorrected,
  /// [n_c, n_f].
  kLiteral,
};

namespace detail {

/// P(a < Z < b) for a standard normal Z, evaluated on the tail that keeps
/// precision.
inline double normal_interval(double a, double b) {
  if (b <= a) return 0.0;
  constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  if (a >= 0.0) return 0.5 * (std::erfc(a * inv_sqrt2) - std::erfc(b * inv_sqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * inv_sqrt2) - std::erfc(-a * inv_sqrt2));
  return 1.0 - 0.5 * (std::erfc(-a * inv_sqrt2) + std::erfc(b * inv_sqrt2));
}

}  // namespace detail

/// Violation probability with p(n | N) replaced by a Gaussian of mean
/// N (2 + g^2 S) / 4 and variance N (4 - g^4 S^2) / 16.
inline double gaussian_violation_probability(std::int64_t trials, double s_param, double gamma,
                                             GaussianLimits limits = GaussianLimits::kContinuityCorrected) {
  const double contracted = s_prime_distribution(s_param, gamma).mean() / 2.0;  // gamma^2 S / 2
  const auto big_n = static_cast<double>(trials);
  const double variance = big_n / 4.0 * (1.0 - contracted * contracted);
  if (!(variance > kBoundarySnap * big_n)) {
    throw degenerate_distribution_error("gaussian approximation: |gamma^2 S| = 2 gives zero variance");
  }
  const double mean = big_n / 4.0 * (2.0 + 2.0 * contracted);
  const double sigma = std::sqrt(variance);
  const ViolationThresholds t = violation_thresholds(trials, gamma);
  const double widen = limits == GaussianLimits::kContinuityCorrected ? 0.5 : 0.0;
  const double lo = static_cast<double>(t.n_c) - widen;
  const double hi = static_cast<double>(t.n_f) + widen;
  return std::clamp(1.0 - detail::normal_interval((lo - mean) / sigma, (hi - mean) / sigma), 0.0, 1.0);
}

/// Quasi-law of the noiseless statistic s in {+2, -2}; negative iff |S| > 2.
struct SQuasiDistribution {
  double q_plus2 = 0.5;
  double q_minus2 = 0.5;

  bool has_negative_entry() const { return q_plus2 < 0.0 || q_minus2 < 0.0; }
  double mean() const { return 2.0 * (q_plus2 - q_minus2); }
};

/// q(s = +-2) = 1/2 +- S / 4.
inline SQuasiDistribution s_quasi_distribution(double s_param) {
  detail::require(std::isfinite(s_param) && std::abs(s_param) <= 4.0, "s_quasi_distribution: |S| > 4");
  return {0.5 + s_param / 4.0, 0.5 - s_param / 4.0};
}

/// Reduction of a 16-outcome quasi-distribution onto s.
inline SQuasiDistribution s_quasi_distribution_of(const QuasiDistribution16& quasi) {
  SQuasiDistribution out{0.0, 0.0};
  for (std::size_t i = 0; i < kOutcomeCount; ++i) (s_of_outcome(Outcome4::from_index(i)) > 0 ? out.q_plus2 : out.q_minus2) += quasi[i];
  return out;
}

/// Side-by-side result of the noisy-bound and data-inversion routes.
struct RouteComparison {
  std::vector<std::int64_t> noisy_violating;
  std::vector<std::int64_t> inverted_violating;
  double p_noisy = 0.0;
  double p_inverted = 0.0;

  bool sets_equal() const { return noisy_violating == inverted_violating; }
  bool probabilities_bit_equal() const;
  bool equivalent() const { return sets_equal() && probabilities_bit_equal(); }
};

inline bool RouteComparison::probabilities_bit_equal() const {
  return std::bit_cast<std::uint64_t>(p_noisy) == std::bit_cast<std::uint64_t>(p_inverted);
}

namespace detail {

inline double violation_probability_of_set(std::int64_t trials, const SPrimeDistribution& dist,
                                           const std::vector<std::int64_t>& violating) {
  std::vector<std::int64_t> complement;
  std::size_t j = 0;
  for (std::int64_t n = 0; n <= trials; ++n) {
    if (j < violating.size() && violating[j] == n) {
      ++j;
      continue;
    }
    complement.push_back(n);
  }
  if (complement.empty()) return 1.0;
  return std::clamp(1.0 - pmf_mass(trials, dist, std::move(complement)), 0.0, 1.0);
}

}  // namespace detail

/// Evaluates both formulations independently: the noisy route flags n with
/// |S'_N| > 2 gamma^2, the inverted route flags n with |S'_N / gamma^2| > 2.
inline RouteComparison compare_routes(std::int64_t trials, double s_param, double gamma) {
  detail::require(trials >= 1, "compare_routes: N must be >= 1");
  detail::require_invertible(gamma);
  const SPrimeDistribution dist = s_prime_distribution(s_param, gamma);
  const double bound = noisy_bound(gamma);
  RouteComparison out;
  for (std::int64_t n = 0; n <= trials; ++n) {
    const TrialCounts counts(n, trials);
    if (exceeds_bound(finite_mean_noisy(counts), bound)) out.noisy_violating.push_back(n);
    if (exceeds_bound(finite_mean_inverted(counts, gamma), 2.0)) out.inverted_violating.push_back(n);
  }
  out.p_noisy = exact_violation_probability(trials, s_param, gamma);
  out.p_inverted = detail::violation_probability_of_set(trials, dist, out.inverted_violating);
  return out;
}

inline bool route_equivalence_check(std::int64_t trials, double s_param, double gamma) {
  return compare_routes(trials, s_param, gamma).equivalent();
}

/// Everything known about an (N, S, gamma) point.
struct FiniteNReport {
  std::int64_t n_trials = 0;
  double s_param = 0.0;
  double gamma = 0.0;
  std::int64_t n_c = 0;
  std::int64_t n_f = 0;
  double p_violation_exact = 0.0;
  /// NaN when the Gaussian is degenerate (|gamma^2 S| = 2).
  double p_violation_gauss = 0.0;
};

inline FiniteNReport finite_n_report(std::int64_t trials, double s_param, double gamma,
                                     GaussianLimits limits = GaussianLimits::kContinuityCorrected) {
  FiniteNReport r;
  r.n_trials = trials;
  r.s_param = s_param;
  r.gamma = gamma;
  const ViolationThresholds t = violation_thresholds(trials, gamma);
  r.n_c = t.n_c;
  r.n_f = t.n_f;
  r.p_violation_exact = exact_violation_probability(trials, s_param, gamma);
  try {
    r.p_violation_gauss = gaussian_violation_probability(trials, s_param, gamma, limits);
  } catch (const degenerate_distribution_error&) {
    r.p_violation_gauss = std::nan("");
  }
  return r;
}

}  // namespace bellstat
