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
#include <cstddef>
#include <numeric>
#include <span>
#include <string>

#include "bellstat/errors.hpp"

namespace bellstat {

/// Number of four-tuples (x, y, u, v) with every component +1 or -1.
inline constexpr std::size_t kOutcomeCount = 16;

/// Tolerances shared by the distribution types.
inline constexpr double kNegativeFloor = 1e-12;
inline constexpr double kSumTolerance = 1e-10;

/// A dichotomic four-tuple (x, y, u, v). x, y belong to party A and u, v to
/// party B.
///
/// Outcomes are enumerated by `index()`: bit 3 is x, bit 2 is y, bit 1 is u
/// and bit 0 is v, with a set bit meaning -1. Index 0 is (+1, +1, +1, +1).
struct Outcome4 {
  int x = 1;
  int y = 1;
  int u = 1;
  int v = 1;

  static constexpr Outcome4 from_index(std::size_t index) {
    auto bit = [index](int shift) { return ((index >> shift) & 1U) != 0 ? -1 : 1; };
    return {bit(3), bit(2), bit(1), bit(0)};
  }

  constexpr std::size_t index() const {
    auto bit = [](int s) -> std::size_t { return s < 0 ? 1 : 0; };
    return (bit(x) << 3) | (bit(y) << 2) | (bit(u) << 1) | bit(v);
  }

  constexpr bool is_dichotomic() const {
    auto ok = [](int s) { return s == 1 || s == -1; };
    return ok(x) && ok(y) && ok(u) && ok(v);
  }

  constexpr bool operator==(const Outcome4&) const = default;
};

inline std::string to_string(const Outcome4& o) {
  auto c = [](int s) { return s > 0 ? '+' : '-'; };
  return {c(o.x), c(o.y), c(o.u), c(o.v)};
}

/// Which of the four dichotomic observables a marginal refers to.
enum class Observable { kX, kY, kU, kV };

inline int component(const Outcome4& o, Observable which) {
  switch (which) {
    case Observable::kX: return o.x;
    case Observable::kY: return o.y;
    case Observable::kU: return o.u;
    case Observable::kV: return o.v;
  }
  return 0;
}

/// Bona fide probability distribution over the 16 outcomes.
///
/// Entries down to -1e-12 are accepted and clamped to zero; the total must be
/// 1 within 1e-10.
class JointDistribution16 {
 public:
  using Array = std::array<double, kOutcomeCount>;

  JointDistribution16() { probs_.fill(1.0 / kOutcomeCount); }

  explicit JointDistribution16(const Array& probs) : probs_(probs) {
    double total = 0.0;
    for (double& p : probs_) {
      detail::require(std::isfinite(p), "joint distribution: non-finite entry");
      detail::require(p >= -kNegativeFloor, "joint distribution: negative entry " + std::to_string(p));
      if (p < 0.0) p = 0.0;
      total += p;
    }
    detail::require(std::abs(total - 1.0) <= kSumTolerance,
                    "joint distribution: entries sum to " + std::to_string(total));
  }

  static JointDistribution16 uniform() { return {}; }

  double operator[](std::size_t i) const { return probs_[i]; }
  double operator[](const Outcome4& o) const { return probs_[o.index()]; }
  const Array& values() const { return probs_; }
  std::span<const double, kOutcomeCount> span() const { return probs_; }

 private:
  Array probs_;
};

/// Signed unit-sum measure over the 16 outcomes; entries may be negative.
class QuasiDistribution16 {
 public:
  using Array = std::array<double, kOutcomeCount>;

  explicit QuasiDistribution16(const Array& weights) : weights_(weights) {
    double total = 0.0;
    for (double w : weights_) {
      detail::require(std::isfinite(w), "quasi-distribution: non-finite entry");
      total += w;
    }
    detail::require(std::abs(total - 1.0) <= kSumTolerance,
                    "quasi-distribution: entries sum to " + std::to_string(total));
  }

  double operator[](std::size_t i) const { return weights_[i]; }
  double operator[](const Outcome4& o) const { return weights_[o.index()]; }
  const Array& values() const { return weights_; }

  double min_entry() const { return *std::min_element(weights_.begin(), weights_.end()); }
  bool has_negative_entry(double tolerance = kNegativeFloor) const { return min_entry() < -tolerance; }

 private:
  Array weights_;
};

}  // namespace bellstat
