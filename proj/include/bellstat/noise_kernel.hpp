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
#include <string>

#include "bellstat/errors.hpp"
#include "bellstat/outcome.hpp"

namespace bellstat {

/// Slack on the per-party feasibility constraint gx^2 + gy^2 <= 1, so that
/// gamma = 1/sqrt(2) computed in double precision is accepted.
inline constexpr double kFeasibilitySlack = 1e-12;

namespace detail {

inline void require_sign(int kappa, const char* name) {
  if (kappa != 1 && kappa != -1) {
    throw domain_error(std::string(name) + " must be +1 or -1, got " + std::to_string(kappa));
  }
}

inline void require_gamma(double gamma) {
  require(std::isfinite(gamma) && std::abs(gamma) <= 1.0,
          "gamma must satisfy |gamma| <= 1, got " + std::to_string(gamma));
}

inline void require_invertible(double gamma) {
  require_gamma(gamma);
  if (gamma == 0.0) throw singular_inversion_error("noise kernel with gamma = 0 is not invertible");
}

// Row/column slot of a dichotomic value in 2x2 kernels: +1 -> 0, -1 -> 1.
constexpr std::size_t slot(int kappa) { return kappa > 0 ? 0 : 1; }
constexpr int sign_of_slot(std::size_t slot) { return slot == 0 ? 1 : -1; }

}  // namespace detail

/// Accuracy factors of the noisy joint measurement, one per observable.
///
/// Construction enforces |g| <= 1 for each factor and the per-party
/// constraints gx^2 + gy^2 <= 1, gu^2 + gv^2 <= 1. Cross-party combinations
/// are not constrained.
class GammaFactors {
 public:
  GammaFactors(double gamma_x, double gamma_y, double gamma_u, double gamma_v)
      : gamma_x_(gamma_x), gamma_y_(gamma_y), gamma_u_(gamma_u), gamma_v_(gamma_v) {
    for (double g : {gamma_x, gamma_y, gamma_u, gamma_v}) detail::require_gamma(g);
    detail::require(gamma_x * gamma_x + gamma_y * gamma_y <= 1.0 + kFeasibilitySlack,
                    "infeasible gammas: gamma_x^2 + gamma_y^2 > 1");
    detail::require(gamma_u * gamma_u + gamma_v * gamma_v <= 1.0 + kFeasibilitySlack,
                    "infeasible gammas: gamma_u^2 + gamma_v^2 > 1");
  }

  /// All four factors set to `gamma`.
  static GammaFactors equal(double gamma) { return {gamma, gamma, gamma, gamma}; }

  double gamma_x() const { return gamma_x_; }
  double gamma_y() const { return gamma_y_; }
  double gamma_u() const { return gamma_u_; }
  double gamma_v() const { return gamma_v_; }

  double of(Observable which) const {
    switch (which) {
      case Observable::kX: return gamma_x_;
      case Observable::kY: return gamma_y_;
      case Observable::kU: return gamma_u_;
      case Observable::kV: return gamma_v_;
    }
    return 0.0;
  }

  bool is_equal() const {
    return gamma_x_ == gamma_y_ && gamma_y_ == gamma_u_ && gamma_u_ == gamma_v_;
  }

  bool any_zero() const {
    return gamma_x_ == 0.0 || gamma_y_ == 0.0 || gamma_u_ == 0.0 || gamma_v_ == 0.0;
  }

 private:
  double gamma_x_;
  double gamma_y_;
  double gamma_u_;
  double gamma_v_;
};

/// Probabilities of the outcomes +1 and -1 of a dichotomic observable.
class BinaryDistribution {
 public:
  BinaryDistribution(double p_plus, double p_minus) : p_plus_(p_plus), p_minus_(p_minus) {
    detail::require(std::isfinite(p_plus) && std::isfinite(p_minus), "binary distribution: non-finite entry");
    detail::require(p_plus >= -kNegativeFloor && p_minus >= -kNegativeFloor,
                    "binary distribution: negative probability");
    detail::require(std::abs(p_plus + p_minus - 1.0) <= kSumTolerance,
                    "binary distribution: probabilities do not sum to 1");
    p_plus_ = std::max(p_plus_, 0.0);
    p_minus_ = std::max(p_minus_, 0.0);
  }

  static BinaryDistribution uniform() { return {0.5, 0.5}; }

  /// Distribution with mean value `mean`, i.e. p(+1) = (1 + mean) / 2.
  static BinaryDistribution from_mean(double mean) {
    detail::require(std::abs(mean) <= 1.0, "binary distribution: |mean| > 1");
    return {0.5 * (1.0 + mean), 0.5 * (1.0 - mean)};
  }

  double p_plus() const { return p_plus_; }
  double p_minus() const { return p_minus_; }
  double probability(int kappa) const { return kappa > 0 ? p_plus_ : p_minus_; }
  double mean() const { return p_plus_ - p_minus_; }
  double variance() const { return 1.0 - mean() * mean(); }

 private:
  double p_plus_;
  double p_minus_;
};

/// Unit-sum weights on +1 and -1 with no positivity requirement.
class SignedBinaryDistribution {
 public:
  SignedBinaryDistribution(double q_plus, double q_minus) : q_plus_(q_plus), q_minus_(q_minus) {
    detail::require(std::isfinite(q_plus) && std::isfinite(q_minus), "signed distribution: non-finite entry");
    detail::require(std::abs(q_plus + q_minus - 1.0) <= kSumTolerance,
                    "signed distribution: weights do not sum to 1");
  }

  double q_plus() const { return q_plus_; }
  double q_minus() const { return q_minus_; }
  double weight(int kappa) const { return kappa > 0 ? q_plus_ : q_minus_; }
  bool has_negative_entry() const { return q_plus_ < 0.0 || q_minus_ < 0.0; }

 private:
  double q_plus_;
  double q_minus_;
};

/// 2x2 kernel k(row | column) with row/column slot 0 for +1 and 1 for -1.
struct KernelMatrix2 {
  std::array<std::array<double, 2>, 2> entries{};

  double operator()(int row_kappa, int column_kappa) const {
    return entries[detail::slot(row_kappa)][detail::slot(column_kappa)];
  }

  double column_sum(int column_kappa) const {
    const auto c = detail::slot(column_kappa);
    return entries[0][c] + entries[1][c];
  }

  bool is_nonnegative() const {
    for (const auto& row : entries)
      for (double e : row)
        if (e < 0.0) return false;
    return true;
  }

  KernelMatrix2 operator*(const KernelMatrix2& rhs) const {
    KernelMatrix2 out;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        out.entries[i][j] = entries[i][0] * rhs.entries[0][j] + entries[i][1] * rhs.entries[1][j];
    return out;
  }
};

/// Forward noise kernel p(kappa' | kappa) = (1 + gamma kappa kappa') / 2.
inline double forward_kernel(double gamma, int kappa, int kappa_prime) {
  detail::require_gamma(gamma);
  detail::require_sign(kappa, "kappa");
  detail::require_sign(kappa_prime, "kappa_prime");
  return 0.5 * (1.0 + gamma * kappa * kappa_prime);
}

/// Inverse kernel weight (1 + kappa kappa' / gamma) / 2. Not a probability:
/// it is negative or above 1 whenever |gamma| < 1.
inline double inverse_kernel(double gamma, int kappa, int kappa_prime) {
  detail::require_invertible(gamma);
  detail::require_sign(kappa, "kappa");
  detail::require_sign(kappa_prime, "kappa_prime");
  return 0.5 * (1.0 + kappa * kappa_prime / gamma);
}

/// entries[kappa'][kappa] = forward_kernel(gamma, kappa, kappa').
inline KernelMatrix2 forward_kernel_matrix(double gamma) {
  KernelMatrix2 k;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      k.entries[r][c] = forward_kernel(gamma, detail::sign_of_slot(c), detail::sign_of_slot(r));
  return k;
}

/// entries[kappa][kappa'] = inverse_kernel(gamma, kappa, kappa').
inline KernelMatrix2 inverse_kernel_matrix(double gamma) {
  KernelMatrix2 k;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      k.entries[r][c] = inverse_kernel(gamma, detail::sign_of_slot(r), detail::sign_of_slot(c));
  return k;
}

/// Noisy marginal of a dichotomic observable. The mean contracts by gamma.
inline BinaryDistribution apply_noise(const BinaryDistribution& marginal, double gamma) {
  detail::require_gamma(gamma);
  const double plus = forward_kernel(gamma, 1, 1) * marginal.p_plus() + forward_kernel(gamma, -1, 1) * marginal.p_minus();
  const double minus = forward_kernel(gamma, 1, -1) * marginal.p_plus() + forward_kernel(gamma, -1, -1) * marginal.p_minus();
  return {plus, minus};
}

/// Recovers the noiseless marginal from its noisy counterpart. The result is
/// signed when `noisy` is not reachable from a bona fide noiseless marginal.
inline SignedBinaryDistribution invert_marginal(const BinaryDistribution& noisy, double gamma) {
  detail::require_invertible(gamma);
  const double plus = inverse_kernel(gamma, 1, 1) * noisy.p_plus() + inverse_kernel(gamma, 1, -1) * noisy.p_minus();
  const double minus = inverse_kernel(gamma, -1, 1) * noisy.p_plus() + inverse_kernel(gamma, -1, -1) * noisy.p_minus();
  return {plus, minus};
}

/// Variance 1 - <K'>^2 of a dichotomic observable with mean `mean_noisy`.
inline double noisy_variance(double mean_noisy) {
  detail::require(std::isfinite(mean_noisy) && std::abs(mean_noisy) <= 1.0, "noisy_variance: |mean| > 1");
  return 1.0 - mean_noisy * mean_noisy;
}

/// Product of the four single-observable forward kernels, p(xi' | xi).
inline double forward_joint_kernel(const GammaFactors& gammas, const Outcome4& xi, const Outcome4& xi_prime) {
  detail::require(xi.is_dichotomic() && xi_prime.is_dichotomic(), "outcome components must be +1 or -1");
  return forward_kernel(gammas.gamma_x(), xi.x, xi_prime.x) * forward_kernel(gammas.gamma_y(), xi.y, xi_prime.y) *
         forward_kernel(gammas.gamma_u(), xi.u, xi_prime.u) * forward_kernel(gammas.gamma_v(), xi.v, xi_prime.v);
}

/// Product of the four inverse kernels, p~(xi | xi').
inline double inverse_joint_kernel(const GammaFactors& gammas, const Outcome4& xi, const Outcome4& xi_prime) {
  detail::require(xi.is_dichotomic() && xi_prime.is_dichotomic(), "outcome components must be +1 or -1");
  return inverse_kernel(gammas.gamma_x(), xi.x, xi_prime.x) * inverse_kernel(gammas.gamma_y(), xi.y, xi_prime.y) *
         inverse_kernel(gammas.gamma_u(), xi.u, xi_prime.u) * inverse_kernel(gammas.gamma_v(), xi.v, xi_prime.v);
}

using KernelMatrix16 = std::array<std::array<double, kOutcomeCount>, kOutcomeCount>;

/// entries[xi'][xi] = forward_joint_kernel(gammas, xi, xi').
inline KernelMatrix16 forward_joint_kernel_matrix(const GammaFactors& gammas) {
  KernelMatrix16 k{};
  for (std::size_t r = 0; r < kOutcomeCount; ++r)
    for (std::size_t c = 0; c < kOutcomeCount; ++c)
      k[r][c] = forward_joint_kernel(gammas, Outcome4::from_index(c), Outcome4::from_index(r));
  return k;
}

/// entries[xi][xi'] = inverse_joint_kernel(gammas, xi, xi').
inline KernelMatrix16 inverse_joint_kernel_matrix(const GammaFactors& gammas) {
  if (gammas.any_zero()) throw singular_inversion_error("joint inversion needs every gamma nonzero");
  KernelMatrix16 k{};
  for (std::size_t r = 0; r < kOutcomeCount; ++r)
    for (std::size_t c = 0; c < kOutcomeCount; ++c)
      k[r][c] = inverse_joint_kernel(gammas, Outcome4::from_index(r), Outcome4::from_index(c));
  return k;
}

namespace detail {

inline std::array<double, kOutcomeCount> apply(const KernelMatrix16& k, const std::array<double, kOutcomeCount>& in) {
  std::array<double, kOutcomeCount> out{};
  for (std::size_t r = 0; r < kOutcomeCount; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < kOutcomeCount; ++c) acc += k[r][c] * in[c];
    out[r] = acc;
  }
  return out;
}

}  // namespace detail

/// Pushes a (possibly signed) 16-outcome weight vector through the forward
/// joint kernel.
inline std::array<double, kOutcomeCount> apply_joint_noise(const std::array<double, kOutcomeCount>& weights,
                                                           const GammaFactors& gammas) {
  return detail::apply(forward_joint_kernel_matrix(gammas), weights);
}

inline JointDistribution16 apply_joint_noise(const JointDistribution16& joint, const GammaFactors& gammas) {
  return JointDistribution16(detail::apply(forward_joint_kernel_matrix(gammas), joint.values()));
}

/// Noise-removed joint quasi-distribution p(xi) = sum_xi' p~(xi | xi') p'(xi').
inline QuasiDistribution16 invert_joint(const JointDistribution16& noisy, const GammaFactors& gammas) {
  return QuasiDistribution16(detail::apply(inverse_joint_kernel_matrix(gammas), noisy.values()));
}

}  // namespace bellstat
