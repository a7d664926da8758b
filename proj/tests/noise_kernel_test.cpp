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

#include "bellstat/noise_kernel.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "bellstat/monte_carlo.hpp"
#include "bellstat/quantum.hpp"
#include "bellstat/random_models.hpp"
#include "gtest/gtest.h"

using namespace bellstat;

namespace {

constexpr double kTol = 1e-12;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// (1 + 1/sqrt2) / 2 and (1 +- sqrt2) / 2, evaluated independently.
constexpr double kForwardAgree = 0.8535533905932737;
constexpr double kForwardDisagree = 0.14644660940672627;
constexpr double kInverseAgree = 1.2071067811865475;
constexpr double kInverseDisagree = -0.20710678118654757;

// Oracle: contract a 16-vector with a 2x2 kernel one variable at a time.
// Kernel is given as k(out | in) by a callable on signs.
template <typename Kernel>
std::array<double, 16> contract_per_variable(std::array<double, 16> w, const std::array<double, 4>& gammas,
                                             Kernel kernel) {
  for (int var = 0; var < 4; ++var) {
    const int shift = 3 - var;
    std::array<double, 16> next{};
    for (std::size_t out = 0; out < 16; ++out) {
      for (int in_sign : {1, -1}) {
        const int out_sign = ((out >> shift) & 1U) ? -1 : 1;
        std::size_t in = out;
        if (in_sign < 0) in |= (std::size_t{1} << shift);
        else in &= ~(std::size_t{1} << shift);
        next[out] += kernel(gammas[var], in_sign, out_sign) * w[in];
      }
    }
    w = next;
  }
  return w;
}

}  // namespace

TEST(ForwardKernel, Examples) {
  EXPECT_EQ(forward_kernel(1.0, 1, 1), 1.0);
  EXPECT_EQ(forward_kernel(1.0, 1, -1), 0.0);
  for (int k : {1, -1})
    for (int kp : {1, -1}) EXPECT_EQ(forward_kernel(0.0, k, kp), 0.5);
  EXPECT_NEAR(forward_kernel(kInvSqrt2, 1, 1), kForwardAgree, kTol);
  EXPECT_NEAR(forward_kernel(kInvSqrt2, 1, -1), kForwardDisagree, kTol);
}

TEST(ForwardKernel, RejectsOutOfDomain) {
  EXPECT_THROW(forward_kernel(1.01, 1, 1), domain_error);
  EXPECT_THROW(forward_kernel(-2.0, 1, 1), domain_error);
  EXPECT_THROW(forward_kernel(NAN, 1, 1), domain_error);
  EXPECT_THROW(forward_kernel(0.5, 0, 1), domain_error);
  EXPECT_THROW(forward_kernel(0.5, 1, 3), domain_error);
}

TEST(ApplyNoise, Examples) {
  const auto uniform = apply_noise(BinaryDistribution::uniform(), 0.3);
  EXPECT_NEAR(uniform.p_plus(), 0.5, kTol);
  EXPECT_NEAR(uniform.p_minus(), 0.5, kTol);

  const auto delta = apply_noise(BinaryDistribution(1.0, 0.0), kInvSqrt2);
  EXPECT_NEAR(delta.p_plus(), kForwardAgree, kTol);
  EXPECT_NEAR(delta.p_minus(), kForwardDisagree, kTol);

  const BinaryDistribution p(0.37, 0.63);
  const auto same = apply_noise(p, 1.0);
  EXPECT_NEAR(same.p_plus(), 0.37, kTol);
  EXPECT_NEAR(same.p_minus(), 0.63, kTol);
}

TEST(ApplyNoise, RejectsInvalidDistribution) {
  EXPECT_THROW(BinaryDistribution(0.7, 0.7), domain_error);
  EXPECT_THROW(BinaryDistribution(-0.1, 1.1), domain_error);
  EXPECT_THROW(apply_noise(BinaryDistribution::uniform(), 1.5), domain_error);
}

TEST(InverseKernel, Examples) {
  EXPECT_EQ(inverse_kernel(1.0, 1, 1), 1.0);
  EXPECT_EQ(inverse_kernel(1.0, -1, -1), 1.0);
  EXPECT_EQ(inverse_kernel(1.0, 1, -1), 0.0);
  EXPECT_NEAR(inverse_kernel(kInvSqrt2, 1, 1), kInverseAgree, kTol);
  EXPECT_NEAR(inverse_kernel(kInvSqrt2, -1, -1), kInverseAgree, kTol);
  EXPECT_NEAR(inverse_kernel(kInvSqrt2, 1, -1), kInverseDisagree, kTol);
}

TEST(InverseKernel, ZeroGammaIsSingular) {
  EXPECT_THROW(inverse_kernel(0.0, 1, 1), singular_inversion_error);
  EXPECT_THROW(inverse_kernel_matrix(0.0), singular_inversion_error);
  EXPECT_THROW(invert_marginal(BinaryDistribution::uniform(), 0.0), singular_inversion_error);
}

TEST(InvertMarginal, Examples) {
  const BinaryDistribution p(0.7, 0.3);
  const auto back = invert_marginal(apply_noise(p, 0.6), 0.6);
  EXPECT_NEAR(back.q_plus(), 0.7, kTol);
  EXPECT_NEAR(back.q_minus(), 0.3, kTol);

  const auto recovered = invert_marginal(BinaryDistribution(kForwardAgree, kForwardDisagree), kInvSqrt2);
  EXPECT_NEAR(recovered.q_plus(), 1.0, kTol);
  EXPECT_NEAR(recovered.q_minus(), 0.0, kTol);

  const auto signed_back = invert_marginal(BinaryDistribution(1.0, 0.0), kInvSqrt2);
  EXPECT_NEAR(signed_back.q_plus(), kInverseAgree, kTol);
  EXPECT_NEAR(signed_back.q_minus(), kInverseDisagree, kTol);
  EXPECT_TRUE(signed_back.has_negative_entry());
  EXPECT_NEAR(signed_back.q_plus() + signed_back.q_minus(), 1.0, kTol);
}

TEST(NoisyVariance, Examples) {
  EXPECT_EQ(noisy_variance(0.0), 1.0);
  EXPECT_EQ(noisy_variance(1.0), 0.0);
  EXPECT_EQ(noisy_variance(-1.0), 0.0);
  EXPECT_NEAR(noisy_variance(kInvSqrt2 * 1.0), 0.5, kTol);
  EXPECT_THROW(noisy_variance(1.2), domain_error);
}

TEST(GammaFactors, Feasibility) {
  EXPECT_NO_THROW(GammaFactors::equal(kInvSqrt2));
  EXPECT_NO_THROW(GammaFactors(1.0, 0.0, 0.6, 0.8));
  EXPECT_THROW(GammaFactors(0.8, 0.8, 0.1, 0.1), domain_error);
  EXPECT_THROW(GammaFactors(0.1, 0.1, 0.9, 0.5), domain_error);
  EXPECT_THROW(GammaFactors(1.1, 0.0, 0.0, 0.0), domain_error);
  // Cross-party products are unconstrained.
  EXPECT_NO_THROW(GammaFactors(1.0, 0.0, 1.0, 0.0));
  EXPECT_TRUE(GammaFactors::equal(0.3).is_equal());
  EXPECT_FALSE(GammaFactors(0.3, 0.3, 0.3, 0.2).is_equal());
}

TEST(ForwardJointKernel, Examples) {
  // All four gammas equal to 1 violate gx^2 + gy^2 <= 1, so the noiseless
  // product is checked from the scalar kernels.
  for (std::size_t i = 0; i < 16; ++i) {
    const Outcome4 xi = Outcome4::from_index(i);
    double identity = 1.0;
    for (int s : {xi.x, xi.y, xi.u, xi.v}) identity *= forward_kernel(1.0, s, s);
    EXPECT_EQ(identity, 1.0);
  }
  const auto zero = GammaFactors::equal(0.0);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j)
      EXPECT_EQ(forward_joint_kernel(zero, Outcome4::from_index(i), Outcome4::from_index(j)), 1.0 / 16.0);

  const auto g = GammaFactors::equal(kInvSqrt2);
  const Outcome4 xi{1, -1, -1, 1};
  EXPECT_NEAR(forward_joint_kernel(g, xi, xi), 0.5307900429449552, kTol);
  EXPECT_THROW(forward_joint_kernel(g, Outcome4{1, 0, 1, 1}, xi), domain_error);
}

TEST(ForwardJointKernel, MatrixIsColumnStochasticAndMatchesOracle) {
  SplitMix64 rng(11);
  for (double g : {0.0, 0.3, kInvSqrt2}) {
    const auto gammas = GammaFactors(g, std::sqrt(1 - g * g) * 0.5, g * 0.9, 0.1);
    const auto k = forward_joint_kernel_matrix(gammas);
    for (std::size_t c = 0; c < 16; ++c) {
      double col = 0.0;
      for (std::size_t r = 0; r < 16; ++r) {
        EXPECT_GE(k[r][c], 0.0);
        col += k[r][c];
      }
      EXPECT_NEAR(col, 1.0, kTol);
    }
    const auto p = random_joint(rng);
    const auto fast = apply_joint_noise(p.values(), gammas);
    const auto oracle = contract_per_variable(
        p.values(), {gammas.gamma_x(), gammas.gamma_y(), gammas.gamma_u(), gammas.gamma_v()},
        [](double gamma, int in, int out) { return 0.5 * (1.0 + gamma * in * out); });
    for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(fast[i], oracle[i], kTol);
  }
}

TEST(InvertJoint, IdentityAtUnitGammaPerVariable) {
  // Per-variable inverse kernel at gamma = 1 is the identity matrix.
  const auto k = inverse_kernel_matrix(1.0);
  EXPECT_EQ(k(1, 1), 1.0);
  EXPECT_EQ(k(-1, -1), 1.0);
  EXPECT_EQ(k(1, -1), 0.0);
  EXPECT_EQ(k(-1, 1), 0.0);
}

TEST(InvertJoint, MatchesPerVariableOracle) {
  SplitMix64 rng(3);
  const auto p = random_joint(rng);
  const auto gammas = GammaFactors(0.6, 0.8, -0.8, 0.6);
  const auto oracle = contract_per_variable(p.values(), {0.6, 0.8, -0.8, 0.6},
                                            [](double gamma, int in, int out) { return 0.5 * (1.0 + out * in / gamma); });
  const auto quasi = invert_joint(p, gammas);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(quasi[i], oracle[i], kTol);
}

TEST(InvertJoint, RoundTrip) {
  SplitMix64 rng(8);
  const auto gammas = GammaFactors::equal(0.6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_joint(rng);
    const auto back = invert_joint(apply_joint_noise(p, gammas), gammas);
    const auto forth = apply_joint_noise(invert_joint(p, gammas).values(), gammas);
    double sum = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
      EXPECT_NEAR(back[i], p[i], kTol);
      EXPECT_NEAR(forth[i], p[i], kTol);
      sum += invert_joint(p, gammas)[i];
    }
    EXPECT_NEAR(sum, 1.0, kTol);
  }
}

TEST(InvertJoint, ZeroGammaIsSingular) {
  const auto p = JointDistribution16::uniform();
  EXPECT_THROW(invert_joint(p, GammaFactors(0.5, 0.0, 0.5, 0.5)), singular_inversion_error);
}

TEST(InvertJoint, SingletIsNegative) {
  const auto gammas = GammaFactors::equal(kInvSqrt2);
  const auto noisy = noisy_joint_distribution(TwoQubitState::singlet(), MeasurementSettings::chsh_optimal(), gammas);
  const auto quasi = invert_joint(noisy, gammas);
  EXPECT_TRUE(quasi.has_negative_entry());
  EXPECT_LT(quasi.min_entry(), -1e-3);
}

TEST(KernelProperties, CompositionAndContraction) {
  SplitMix64 rng(17);
  for (int i = 0; i < 500; ++i) {
    double g = 2.0 * rng.uniform() - 1.0;
    if (g == 0.0) continue;
    const auto id = inverse_kernel_matrix(g) * forward_kernel_matrix(g);
    for (int a : {1, -1})
      for (int b : {1, -1}) EXPECT_NEAR(id(a, b), a == b ? 1.0 : 0.0, kTol);
    const auto fwd = forward_kernel_matrix(g);
    EXPECT_TRUE(fwd.is_nonnegative());
    EXPECT_NEAR(fwd.column_sum(1), 1.0, kTol);
    EXPECT_NEAR(fwd.column_sum(-1), 1.0, kTol);
    const auto inv = inverse_kernel_matrix(g);
    EXPECT_NEAR(inv.column_sum(1), 1.0, kTol);
    EXPECT_NEAR(inv.column_sum(-1), 1.0, kTol);

    const double p_plus = rng.uniform();
    const BinaryDistribution p(p_plus, 1.0 - p_plus);
    const auto noisy = apply_noise(p, g);
    EXPECT_NEAR(noisy.mean(), g * p.mean(), kTol);
    EXPECT_GE(noisy.variance(), p.variance() - 1e-15);
    EXPECT_NEAR(apply_noise(BinaryDistribution::uniform(), g).p_plus(), 0.5, kTol);
  }
}
