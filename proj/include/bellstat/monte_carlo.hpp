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
#include <cstdint>
#include <limits>
#include <numbers>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "bellstat/bell_statistics.hpp"
#include "bellstat/errors.hpp"
#include "bellstat/outcome.hpp"

namespace bellstat {

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(state_ += 0x9E3779B97F4A7C15ULL); }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Independent substream for repetition `rep` of a run seeded with `seed`.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t rep) {
  return SplitMix64(SplitMix64::mix(seed ^ SplitMix64::mix(rep + 0x632BE59BD9B4E019ULL)));
}

/// Below this many trials a binomial draw is N Bernoulli draws; at or above
/// it, inverse transform on the tabulated pmf.
inline constexpr std::int64_t kBernoulliCutoff = 1000;

/// Draws n ~ Binomial(N, p(s' = +2)).
class BinomialSampler {
 public:
  BinomialSampler(const SPrimeDistribution& dist, std::int64_t trials) : trials_(trials), p_plus_(dist.p_plus2()) {
    detail::require(trials >= 1, "sampler: N must be >= 1");
    if (trials_ >= kBernoulliCutoff) {
      cdf_.resize(static_cast<std::size_t>(trials_) + 1);
      double acc = 0.0;
      for (std::int64_t n = 0; n <= trials_; ++n) {
        acc += binomial_pmf(TrialCounts(n, trials_), dist);
        cdf_[static_cast<std::size_t>(n)] = acc;
      }
      cdf_.back() = std::numeric_limits<double>::infinity();
    }
  }

  TrialCounts operator()(SplitMix64& stream) const {
    if (cdf_.empty()) {
      std::int64_t n = 0;
      for (std::int64_t i = 0; i < trials_; ++i) n += stream.uniform() < p_plus_ ? 1 : 0;
      return {n, trials_};
    }
    const double u = stream.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return {static_cast<std::int64_t>(it - cdf_.begin()), trials_};
  }

 private:
  std::int64_t trials_;
  double p_plus_;
  std::vector<double> cdf_;
};

/// Draws N outcomes xi' from a 16-outcome law and counts those with s' = +2.
class JointSampler {
 public:
  JointSampler(const JointDistribution16& joint, std::int64_t trials) : trials_(trials) {
    detail::require(trials >= 1, "sampler: N must be >= 1");
    double acc = 0.0;
    for (std::size_t i = 0; i < kOutcomeCount; ++i) {
      acc += joint[i];
      cdf_[i] = acc;
      s_plus_[i] = s_of_outcome(Outcome4::from_index(i)) > 0;
    }
    // Outcomes past the last positive entry are unreachable.
    std::size_t last = kOutcomeCount - 1;
    while (last > 0 && joint[last] == 0.0) --last;
    for (std::size_t i = last; i < kOutcomeCount; ++i) cdf_[i] = std::numeric_limits<double>::infinity();
  }

  Outcome4 draw(SplitMix64& stream) const {
    const double u = stream.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return Outcome4::from_index(static_cast<std::size_t>(it - cdf_.begin()));
  }

  TrialCounts operator()(SplitMix64& stream) const {
    std::int64_t n = 0;
    for (std::int64_t i = 0; i < trials_; ++i) {
      const double u = stream.uniform();
      const auto idx = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
      n += s_plus_[idx] ? 1 : 0;
    }
    return {n, trials_};
  }

 private:
  std::int64_t trials_;
  std::array<double, kOutcomeCount> cdf_{};
  std::array<bool, kOutcomeCount> s_plus_{};
};

/// One N-trial experiment drawn from the s' law.
inline TrialCounts sample_experiment(const SPrimeDistribution& dist, std::int64_t trials, SplitMix64& stream) {
  return BinomialSampler(dist, trials)(stream);
}

struct SimulationSpec {
  std::int64_t trials = 1;
  std::int64_t reps = 1;
  std::uint64_t seed = 0;
  std::variant<SPrimeDistribution, JointDistribution16> source = SPrimeDistribution(0.5, 0.5);
};

struct SimulationResult {
  std::int64_t violation_count = 0;
  std::int64_t reps = 0;
  double empirical_violation_rate = 0.0;
  /// Summary of the per-repetition S'_N.
  double mean_s_prime = 0.0;
  double min_s_prime = 0.0;
  double max_s_prime = 0.0;

  bool operator==(const SimulationResult&) const = default;
};

namespace detail {

struct PartialCounts {
  std::int64_t violations = 0;
  std::int64_t sum_n = 0;
  std::int64_t min_n = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_n = std::numeric_limits<std::int64_t>::min();
};

template <typename Sampler>
PartialCounts run_block(const Sampler& sampler, const ViolationThresholds& t, std::uint64_t seed, std::int64_t begin,
                        std::int64_t end) {
  PartialCounts acc;
  for (std::int64_t rep = begin; rep < end; ++rep) {
    SplitMix64 stream = substream(seed, static_cast<std::uint64_t>(rep));
    const TrialCounts counts = sampler(stream);
    acc.violations += t.violates(counts.n) ? 1 : 0;
    acc.sum_n += counts.n;
    acc.min_n = std::min(acc.min_n, counts.n);
    acc.max_n = std::max(acc.max_n, counts.n);
  }
  return acc;
}

}  // namespace detail

/// Empirical counterpart of exact_violation_probability. Repetition r always
/// uses substream(seed, r) and aggregation is over integers, so the result
/// does not depend on `workers`.
inline SimulationResult estimate_violation_rate(const SimulationSpec& spec, double gamma, unsigned workers = 1) {
  detail::require(spec.trials >= 1, "simulation: N must be >= 1");
  detail::require(spec.reps >= 1, "simulation: reps must be >= 1");
  const ViolationThresholds t = violation_thresholds(spec.trials, gamma);
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::int64_t>(spec.reps, 256))));

  auto run = [&](auto const& sampler) {
    std::vector<detail::PartialCounts> parts(workers);
    const std::int64_t chunk = (spec.reps + workers - 1) / workers;
    auto block = [&](unsigned w) {
      const std::int64_t begin = std::min<std::int64_t>(spec.reps, w * chunk);
      const std::int64_t end = std::min<std::int64_t>(spec.reps, begin + chunk);
      parts[w] = detail::run_block(sampler, t, spec.seed, begin, end);
    };
    if (workers == 1) {
      block(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(block, w);
    }
    detail::PartialCounts total;
    for (const auto& p : parts) {
      total.violations += p.violations;
      total.sum_n += p.sum_n;
      total.min_n = std::min(total.min_n, p.min_n);
      total.max_n = std::max(total.max_n, p.max_n);
    }
    return total;
  };

  const detail::PartialCounts total = std::visit(
      [&](const auto& source) {
        using Source = std::decay_t<decltype(source)>;
        if constexpr (std::is_same_v<Source, SPrimeDistribution>) {
          return run(BinomialSampler(source, spec.trials));
        } else {
          return run(JointSampler(source, spec.trials));
        }
      },
      spec.source);

  const auto n_trials = static_cast<double>(spec.trials);
  SimulationResult r;
  r.reps = spec.reps;
  r.violation_count = total.violations;
  r.empirical_violation_rate = static_cast<double>(total.violations) / static_cast<double>(spec.reps);
  r.mean_s_prime = 2.0 * (2.0 * static_cast<double>(total.sum_n) / (n_trials * static_cast<double>(spec.reps)) - 1.0);
  r.min_s_prime = finite_mean_noisy(TrialCounts(total.min_n, spec.trials));
  r.max_s_prime = finite_mean_noisy(TrialCounts(total.max_n, spec.trials));
  return r;
}

/// Three binomial standard errors of a rate p estimated from `reps` draws.
inline double three_sigma_band(double p, std::int64_t reps) {
  return 3.0 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(reps));
}

/// p-value of the Pearson chi-square test (1 dof) that two samples of a
/// two-valued variable share one law.
inline double chi_square_two_sample_pvalue(std::int64_t plus_a, std::int64_t total_a, std::int64_t plus_b,
                                           std::int64_t total_b) {
  const double n = static_cast<double>(total_a + total_b);
  const double plus = static_cast<double>(plus_a + plus_b);
  const double minus = n - plus;
  if (plus == 0.0 || minus == 0.0) return 1.0;
  double stat = 0.0;
  for (const auto& [observed, total] : {std::pair{plus_a, total_a}, std::pair{plus_b, total_b}}) {
    const double t = static_cast<double>(total);
    const double expected_plus = t * plus / n;
    const double expected_minus = t * minus / n;
    const double o_plus = static_cast<double>(observed);
    const double o_minus = t - o_plus;
    stat += (o_plus - expected_plus) * (o_plus - expected_plus) / expected_plus;
    stat += (o_minus - expected_minus) * (o_minus - expected_minus) / expected_minus;
  }
  return std::erfc(std::sqrt(stat / 2.0));
}

}  // namespace bellstat
