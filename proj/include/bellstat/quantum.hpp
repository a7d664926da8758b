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
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>

#include "bellstat/errors.hpp"
#include "bellstat/noise_kernel.hpp"
#include "bellstat/outcome.hpp"

namespace bellstat {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;

/// Dense row-major complex square matrix of fixed size.
template <std::size_t Dim>
struct SquareMatrix {
  std::array<Complex, Dim * Dim> data{};

  static constexpr std::size_t dim() { return Dim; }

  Complex& operator()(std::size_t r, std::size_t c) { return data[r * Dim + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data[r * Dim + c]; }

  static SquareMatrix identity() {
    SquareMatrix m;
    for (std::size_t i = 0; i < Dim; ++i) m(i, i) = 1.0;
    return m;
  }

  SquareMatrix operator+(const SquareMatrix& rhs) const {
    SquareMatrix out;
    for (std::size_t i = 0; i < Dim * Dim; ++i) out.data[i] = data[i] + rhs.data[i];
    return out;
  }

  SquareMatrix operator*(Complex scale) const {
    SquareMatrix out;
    for (std::size_t i = 0; i < Dim * Dim; ++i) out.data[i] = data[i] * scale;
    return out;
  }

  SquareMatrix operator*(const SquareMatrix& rhs) const {
    SquareMatrix out;
    for (std::size_t r = 0; r < Dim; ++r)
      for (std::size_t k = 0; k < Dim; ++k) {
        const Complex a = (*this)(r, k);
        if (a == Complex{}) continue;
        for (std::size_t c = 0; c < Dim; ++c) out(r, c) += a * rhs(k, c);
      }
    return out;
  }

  SquareMatrix adjoint() const {
    SquareMatrix out;
    for (std::size_t r = 0; r < Dim; ++r)
      for (std::size_t c = 0; c < Dim; ++c) out(r, c) = std::conj((*this)(c, r));
    return out;
  }

  Complex trace() const {
    Complex t{};
    for (std::size_t i = 0; i < Dim; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs_diff(const SquareMatrix& rhs) const {
    double m = 0.0;
    for (std::size_t i = 0; i < Dim * Dim; ++i) m = std::max(m, std::abs(data[i] - rhs.data[i]));
    return m;
  }
};

using Matrix2 = SquareMatrix<2>;
using Matrix4 = SquareMatrix<4>;

/// Tr[a b] without forming the product.
template <std::size_t Dim>
Complex trace_of_product(const SquareMatrix<Dim>& a, const SquareMatrix<Dim>& b) {
  Complex t{};
  for (std::size_t r = 0; r < Dim; ++r)
    for (std::size_t k = 0; k < Dim; ++k) t += a(r, k) * b(k, r);
  return t;
}

inline Matrix4 kron(const Matrix2& a, const Matrix2& b) {
  Matrix4 out;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

namespace pauli {

inline Matrix2 x() { return {{Complex{0, 0}, Complex{1, 0}, Complex{1, 0}, Complex{0, 0}}}; }
inline Matrix2 y() { return {{Complex{0, 0}, Complex{0, -1}, Complex{0, 1}, Complex{0, 0}}}; }
inline Matrix2 z() { return {{Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{-1, 0}}}; }

/// n . sigma for a real 3-vector n.
inline Matrix2 along(const Vec3& n) { return x() * n[0] + y() * n[1] + z() * n[2]; }

}  // namespace pauli

namespace detail {

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
template <std::size_t N>
std::array<double, N> symmetric_eigenvalues(std::array<std::array<double, N>, N> a) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = p + 1; q < N; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < N; ++p) {
      for (std::size_t q = p + 1; q < N; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < N; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, N> eig{};
  for (std::size_t i = 0; i < N; ++i) eig[i] = a[i][i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

}  // namespace detail

/// Eigenvalues (ascending) of a Hermitian matrix. H = A + iB is embedded as
/// the real symmetric [[A, -B], [B, A]], whose spectrum is that of H with
/// every eigenvalue doubled.
template <std::size_t Dim>
std::array<double, Dim> hermitian_eigenvalues(const SquareMatrix<Dim>& h) {
  std::array<std::array<double, 2 * Dim>, 2 * Dim> real{};
  for (std::size_t r = 0; r < Dim; ++r)
    for (std::size_t c = 0; c < Dim; ++c) {
      const Complex hermitian_part = 0.5 * (h(r, c) + std::conj(h(c, r)));
      real[r][c] = real[r + Dim][c + Dim] = hermitian_part.real();
      real[r + Dim][c] = hermitian_part.imag();
      real[r][c + Dim] = -hermitian_part.imag();
    }
  const auto doubled = detail::symmetric_eigenvalues(real);
  std::array<double, Dim> eig{};
  for (std::size_t i = 0; i < Dim; ++i) eig[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
  return eig;
}

inline constexpr double kStateTolerance = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-10;
inline constexpr double kUnitNormTolerance = 1e-12;

/// Validated two-qubit density matrix: Hermitian, unit trace, positive
/// semidefinite up to kEigenvalueFloor. Qubit A is the left tensor factor.
class TwoQubitState {
 public:
  explicit TwoQubitState(const Matrix4& rho) : rho_(rho) {
    detail::require(rho.max_abs_diff(rho.adjoint()) <= kStateTolerance, "state: density matrix is not Hermitian");
    const Complex tr = rho.trace();
    detail::require(std::abs(tr - Complex{1.0, 0.0}) <= kStateTolerance,
                    "state: trace is " + std::to_string(tr.real()) + ", expected 1");
    const auto eig = hermitian_eigenvalues(rho);
    detail::require(eig.front() >= kEigenvalueFloor,
                    "state: negative eigenvalue " + std::to_string(eig.front()));
  }

  /// (|01> - |10>) / sqrt(2).
  static TwoQubitState singlet() {
    Matrix4 rho;
    rho(1, 1) = rho(2, 2) = 0.5;
    rho(1, 2) = rho(2, 1) = -0.5;
    return TwoQubitState(rho);
  }

  /// |00>, the +1 eigenstate of sigma_z on both qubits.
  static TwoQubitState product_zero() {
    Matrix4 rho;
    rho(0, 0) = 1.0;
    return TwoQubitState(rho);
  }

  static TwoQubitState maximally_mixed() { return TwoQubitState(Matrix4::identity() * 0.25); }

  /// p |singlet><singlet| + (1 - p) 1/4.
  static TwoQubitState werner(double p) {
    detail::require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "werner: p must lie in [0, 1]");
    return TwoQubitState(singlet().rho() * p + Matrix4::identity() * (0.25 * (1.0 - p)));
  }

  const Matrix4& rho() const { return rho_; }

  double purity() const { return trace_of_product(rho_, rho_).real(); }

  /// <A (x) B> = Tr[rho (A (x) B)].
  double expectation(const Matrix2& a, const Matrix2& b) const { return trace_of_product(rho_, kron(a, b)).real(); }

 private:
  Matrix4 rho_;
};

/// Bloch directions of X, Y (party A) and U, V (party B).
class MeasurementSettings {
 public:
  MeasurementSettings(const Vec3& a_x, const Vec3& a_y, const Vec3& b_u, const Vec3& b_v)
      : a_x_(a_x), a_y_(a_y), b_u_(b_u), b_v_(b_v) {
    for (const Vec3* v : {&a_x_, &a_y_, &b_u_, &b_v_}) require_unit(*v);
  }

  /// X = sigma_z, Y = sigma_x, U = -(sigma_z + sigma_x)/sqrt2,
  /// V = (sigma_z - sigma_x)/sqrt2. Reaches S = 2 sqrt2 on the singlet.
  static MeasurementSettings chsh_optimal() {
    const double h = std::numbers::sqrt2 / 2.0;
    return {{0, 0, 1}, {1, 0, 0}, {-h, 0, -h}, {-h, 0, h}};
  }

  /// Every observable along z.
  static MeasurementSettings all_z() { return {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}}; }

  const Vec3& a_x() const { return a_x_; }
  const Vec3& a_y() const { return a_y_; }
  const Vec3& b_u() const { return b_u_; }
  const Vec3& b_v() const { return b_v_; }

  const Vec3& direction(Observable which) const {
    switch (which) {
      case Observable::kX: return a_x_;
      case Observable::kY: return a_y_;
      case Observable::kU: return b_u_;
      case Observable::kV: return b_v_;
    }
    return a_x_;
  }

  static void require_unit(const Vec3& v) {
    detail::require(std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]), "settings: non-finite vector");
    detail::require(std::abs(detail::norm(v) - 1.0) <= kUnitNormTolerance, "settings: Bloch vector is not unit norm");
  }

 private:
  Vec3 a_x_;
  Vec3 a_y_;
  Vec3 b_u_;
  Vec3 b_v_;
};

/// <XU>, <XV>, <YU>, <YV>.
struct Correlators {
  double xu = 0.0;
  double xv = 0.0;
  double yu = 0.0;
  double yv = 0.0;

  double chsh() const { return xu - xv + yu + yv; }
};

/// Tr[rho (a . sigma) (x) (b . sigma)].
inline double correlator(const TwoQubitState& state, const Vec3& dir_a, const Vec3& dir_b) {
  MeasurementSettings::require_unit(dir_a);
  MeasurementSettings::require_unit(dir_b);
  return std::clamp(state.expectation(pauli::along(dir_a), pauli::along(dir_b)), -1.0, 1.0);
}

inline Correlators correlators(const TwoQubitState& state, const MeasurementSettings& s) {
  return {correlator(state, s.a_x(), s.b_u()), correlator(state, s.a_x(), s.b_v()),
          correlator(state, s.a_y(), s.b_u()), correlator(state, s.a_y(), s.b_v())};
}

/// S = <XU> - <XV> + <YU> + <YV>.
inline double chsh_value(const TwoQubitState& state, const MeasurementSettings& settings) {
  return correlators(state, settings).chsh();
}

/// Noiseless single-observable statistics p_K(kappa | rho).
inline BinaryDistribution exact_marginal(const TwoQubitState& state, const MeasurementSettings& settings,
                                         Observable which) {
  const bool party_a = which == Observable::kX || which == Observable::kY;
  const Matrix2 op = pauli::along(settings.direction(which));
  const Matrix2 id = Matrix2::identity();
  const double mean = party_a ? state.expectation(op, id) : state.expectation(id, op);
  return BinaryDistribution::from_mean(std::clamp(mean, -1.0, 1.0));
}

/// Effects of one party's noisy joint measurement of two spin observables,
/// E(k1, k2) = (1 + g1 k1 d1 . sigma + g2 k2 d2 . sigma) / 4, indexed by
/// slot(k1) * 2 + slot(k2).
///
/// The eigenvalues of (1 + r . sigma) / 4 are (1 +- |r|) / 4, so the family is
/// a POVM iff |g1 k1 d1 + g2 k2 d2| <= 1 for every sign pair.
inline std::array<Matrix2, 4> party_effects(const Vec3& d1, double g1, const Vec3& d2, double g2) {
  std::array<Matrix2, 4> effects;
  for (int k1 : {1, -1}) {
    for (int k2 : {1, -1}) {
      Vec3 r{};
      for (std::size_t i = 0; i < 3; ++i) r[i] = g1 * k1 * d1[i] + g2 * k2 * d2[i];
      detail::require(0.25 * (1.0 - detail::norm(r)) >= kEigenvalueFloor,
                      "infeasible gammas: measurement effect is not positive for these settings");
      effects[detail::slot(k1) * 2 + detail::slot(k2)] = (Matrix2::identity() + pauli::along(r)) * 0.25;
    }
  }
  return effects;
}

/// Full statistics p'(xi' | rho) = Tr[rho E_A(x', y') (x) E_B(u', v')] of the
/// noisy joint measurement of X, Y, U, V.
inline JointDistribution16 noisy_joint_distribution(const TwoQubitState& state, const MeasurementSettings& settings,
                                                    const GammaFactors& gammas) {
  const auto ea = party_effects(settings.a_x(), gammas.gamma_x(), settings.a_y(), gammas.gamma_y());
  const auto eb = party_effects(settings.b_u(), gammas.gamma_u(), settings.b_v(), gammas.gamma_v());
  JointDistribution16::Array probs{};
  for (std::size_t i = 0; i < kOutcomeCount; ++i) {
    const Outcome4 o = Outcome4::from_index(i);
    const auto& a = ea[detail::slot(o.x) * 2 + detail::slot(o.y)];
    const auto& b = eb[detail::slot(o.u) * 2 + detail::slot(o.v)];
    double p = trace_of_product(state.rho(), kron(a, b)).real();
    if (p < 0.0 && p >= -kNegativeFloor) p = 0.0;
    probs[i] = p;
  }
  return JointDistribution16(probs);
}

/// Sums a 16-outcome distribution down to one observable.
inline BinaryDistribution marginal_of(const JointDistribution16& joint, Observable which) {
  double plus = 0.0;
  double minus = 0.0;
  for (std::size_t i = 0; i < kOutcomeCount; ++i) {
    (component(Outcome4::from_index(i), which) > 0 ? plus : minus) += joint[i];
  }
  const double total = plus + minus;
  return {plus / total, minus / total};
}

/// Sum over outcomes of k l p(xi) for observables K, L; any weight vector.
inline double pair_correlation(const std::array<double, kOutcomeCount>& weights, Observable k, Observable l) {
  double acc = 0.0;
  for (std::size_t i = 0; i < kOutcomeCount; ++i) {
    const Outcome4 o = Outcome4::from_index(i);
    acc += component(o, k) * component(o, l) * weights[i];
  }
  return acc;
}

}  // namespace bellstat
