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
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bellstat/bell_statistics.hpp"
#include "bellstat/errors.hpp"
#include "bellstat/monte_carlo.hpp"
#include "bellstat/noise_kernel.hpp"
#include "bellstat/quantum.hpp"
#include "bellstat/quantum_io.hpp"
#include "bellstat/selfcheck.hpp"

// Command implementations behind the `bellstat` executable. Each command
// writes its report to a stream so it can be driven in-process.

namespace bellstat::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kDomainError = 3,
  kSelfcheckFailure = 4,
};

/// Bad flags or configuration; maps to exit code 2.
class usage_error : public std::runtime_error {
 public:
  explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kSchemaVersion = 1;

enum class Outputs { kExact, kGauss, kBoth };
enum class Format { kCsv, kJson, kText };

/// %.12g, with "nan" for NaN.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline Outputs parse_outputs(const std::string& s) {
  if (s == "exact") return Outputs::kExact;
  if (s == "gauss") return Outputs::kGauss;
  if (s == "both") return Outputs::kBoth;
  throw usage_error("outputs must be exact, gauss or both");
}

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  if (s == "text") return Format::kText;
  throw usage_error("format must be csv, json or text");
}

inline GaussianLimits parse_limits(const std::string& s) {
  if (s == "corrected") return GaussianLimits::kContinuityCorrected;
  if (s == "literal") return GaussianLimits::kLiteral;
  throw usage_error("gauss-limits must be corrected or literal");
}

inline void require_usage(bool condition, const std::string& message) {
  if (!condition) throw usage_error(message);
}

// ---------------------------------------------------------------------------
// curve

struct SweepConfig {
  double gamma = std::numbers::sqrt2 / 2.0;
  std::vector<double> s_values;
  std::optional<std::string> state;
  std::optional<std::string> settings;
  std::int64_t n_min = 1;
  std::int64_t n_max = 200;
  std::int64_t n_step = 1;
  Outputs outputs = Outputs::kBoth;
  Format format = Format::kCsv;
  GaussianLimits limits = GaussianLimits::kContinuityCorrected;
  unsigned threads = 1;
};

/// Reads the SweepConfig fields from a JSON document; absent keys keep the
/// values already in `base`.
inline SweepConfig sweep_config_from_json(const nlohmann::json& doc, SweepConfig base = {}) {
  require_usage(doc.is_object(), "config: expected a JSON object");
  try {
    if (doc.contains("gamma")) base.gamma = doc.at("gamma").get<double>();
    if (doc.contains("s_values")) base.s_values = doc.at("s_values").get<std::vector<double>>();
    if (doc.contains("state")) base.state = doc.at("state").get<std::string>();
    if (doc.contains("settings")) base.settings = doc.at("settings").get<std::string>();
    if (doc.contains("n_min")) base.n_min = doc.at("n_min").get<std::int64_t>();
    if (doc.contains("n_max")) base.n_max = doc.at("n_max").get<std::int64_t>();
    if (doc.contains("n_step")) base.n_step = doc.at("n_step").get<std::int64_t>();
    if (doc.contains("outputs")) base.outputs = parse_outputs(doc.at("outputs").get<std::string>());
    if (doc.contains("format")) base.format = parse_format(doc.at("format").get<std::string>());
    if (doc.contains("gauss_limits")) base.limits = parse_limits(doc.at("gauss_limits").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw usage_error(std::string("config: ") + e.what());
  }
  return base;
}

/// S values of the sweep: the explicit list followed by the value of the
/// referenced state and settings, if any.
inline std::vector<double> resolve_s_values(const SweepConfig& config) {
  std::vector<double> values = config.s_values;
  require_usage(config.state.has_value() == config.settings.has_value(), "--state and --settings go together");
  if (config.state) values.push_back(chsh_value(io::resolve_state(*config.state), io::resolve_settings(*config.settings)));
  return values;
}

inline void validate(const SweepConfig& config, const std::vector<double>& s_values) {
  require_usage(std::isfinite(config.gamma) && std::abs(config.gamma) <= 1.0, "--gamma must satisfy |gamma| <= 1");
  require_usage(config.n_min >= 1, "--n-min must be >= 1");
  require_usage(config.n_max >= config.n_min, "--n-max must be >= --n-min");
  require_usage(config.n_step >= 1, "--n-step must be >= 1");
  require_usage(!s_values.empty(), "give at least one --S or a --state/--settings pair");
  require_usage(config.format != Format::kText, "curve output format must be csv or json");
  for (double s : s_values) {
    require_usage(std::isfinite(s) && std::abs(config.gamma * config.gamma * s) <= 2.0 * (1.0 + kBoundarySnap),
                  "|gamma^2 S| must not exceed 2 (S = " + format_number(s) + ")");
  }
}

struct SweepRow {
  double s_param = 0.0;
  std::int64_t trials = 0;
  double p_exact = 0.0;
  double p_gauss = 0.0;
};

/// Rows sorted by (S in input order, N ascending). Points are evaluated on
/// `config.threads` workers into preassigned slots.
inline std::vector<SweepRow> compute_violation_curve(const SweepConfig& config) {
  const std::vector<double> s_values = resolve_s_values(config);
  validate(config, s_values);
  std::vector<SweepRow> rows;
  for (double s : s_values)
    for (std::int64_t n = config.n_min; n <= config.n_max; n += config.n_step) rows.push_back({s, n, 0.0, 0.0});

  auto evaluate = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < rows.size(); i += stride) {
      SweepRow& row = rows[i];
      if (config.outputs != Outputs::kGauss)
        row.p_exact = exact_violation_probability(row.trials, row.s_param, config.gamma);
      if (config.outputs != Outputs::kExact) {
        try {
          row.p_gauss = gaussian_violation_probability(row.trials, row.s_param, config.gamma, config.limits);
        } catch (const degenerate_distribution_error&) {
          row.p_gauss = std::nan("");
        }
      }
    }
  };
  const unsigned workers = std::max(1U, config.threads);
  if (workers == 1) {
    evaluate(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(evaluate, w, workers);
  }
  return rows;
}

inline void write_curve(const std::vector<SweepRow>& rows, const SweepConfig& config, std::ostream& out) {
  const bool exact = config.outputs != Outputs::kGauss;
  const bool gauss = config.outputs != Outputs::kExact;
  if (config.format == Format::kJson) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["gamma"] = config.gamma;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json row;
      row["S"] = r.s_param;
      row["N"] = r.trials;
      if (exact) row["p_exact"] = r.p_exact;
      if (gauss) row["p_gauss"] = std::isnan(r.p_gauss) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.p_gauss);
      doc["rows"].push_back(std::move(row));
    }
    out << doc.dump(2) << '\n';
    return;
  }
  out << "S,N" << (exact ? ",p_exact" : "") << (gauss ? ",p_gauss" : "") << '\n';
  for (const auto& r : rows) {
    out << format_number(r.s_param) << ',' << r.trials;
    if (exact) out << ',' << format_number(r.p_exact);
    if (gauss) out << ',' << format_number(r.p_gauss);
    out << '\n';
  }
}

inline void cmd_violation_curve(const SweepConfig& config, std::ostream& out) {
  write_curve(compute_violation_curve(config), config, out);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateConfig {
  std::int64_t trials = 0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  std::optional<double> gamma;
  std::optional<double> s_param;
  std::optional<std::string> state;
  std::optional<std::string> settings;
  unsigned workers = 1;
  Format format = Format::kText;
};

struct SimulateReport {
  std::int64_t trials = 0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  double s_param = 0.0;
  std::string source;
  SimulationResult result;
  double exact_probability = 0.0;
  double gap = 0.0;
  double band = 0.0;

  bool within_band() const { return gap <= band; }
};

inline SimulateReport run_simulation(const SimulateConfig& config) {
  require_usage(config.trials >= 1, "--N must be >= 1");
  require_usage(config.reps >= 1, "--reps must be >= 1");
  require_usage(config.gamma.has_value(), "--gamma is required");
  require_usage(std::abs(*config.gamma) <= 1.0, "--gamma must satisfy |gamma| <= 1");
  require_usage(config.state.has_value() == config.settings.has_value(), "--state and --settings go together");
  require_usage(config.s_param.has_value() != config.state.has_value(), "give exactly one of --S or --state/--settings");

  SimulateReport report;
  report.trials = config.trials;
  report.reps = config.reps;
  report.seed = config.seed;
  report.gamma = *config.gamma;

  SimulationSpec spec;
  spec.trials = config.trials;
  spec.reps = config.reps;
  spec.seed = config.seed;
  if (config.s_param) {
    report.s_param = *config.s_param;
    require_usage(std::abs(report.gamma * report.gamma * report.s_param) <= 2.0 * (1.0 + kBoundarySnap),
                  "|gamma^2 S| must not exceed 2");
    spec.source = s_prime_distribution(report.s_param, report.gamma);
    report.source = "s-prime";
  } else {
    const TwoQubitState state = io::resolve_state(*config.state);
    const MeasurementSettings settings = io::resolve_settings(*config.settings);
    report.s_param = chsh_value(state, settings);
    spec.source = noisy_joint_distribution(state, settings, GammaFactors::equal(report.gamma));
    report.source = "joint";
  }
  report.result = estimate_violation_rate(spec, report.gamma, config.workers);
  report.exact_probability = exact_violation_probability(config.trials, report.s_param, report.gamma);
  report.gap = std::abs(report.result.empirical_violation_rate - report.exact_probability);
  report.band = three_sigma_band(report.exact_probability, config.reps);
  return report;
}

inline void write_simulation(const SimulateReport& r, Format format, std::ostream& out) {
  if (format == Format::kJson) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["N"] = r.trials;
    doc["reps"] = r.reps;
    doc["seed"] = r.seed;
    doc["gamma"] = r.gamma;
    doc["S"] = r.s_param;
    doc["source"] = r.source;
    doc["violation_count"] = r.result.violation_count;
    doc["empirical_violation_rate"] = r.result.empirical_violation_rate;
    doc["exact_probability"] = r.exact_probability;
    doc["gap"] = r.gap;
    doc["band_3sigma"] = r.band;
    doc["within_band"] = r.within_band();
    doc["s_prime_mean"] = r.result.mean_s_prime;
    doc["s_prime_min"] = r.result.min_s_prime;
    doc["s_prime_max"] = r.result.max_s_prime;
    out << doc.dump(2) << '\n';
    return;
  }
  out << "N " << r.trials << '\n'
      << "reps " << r.reps << '\n'
      << "seed " << r.seed << '\n'
      << "gamma " << format_number(r.gamma) << '\n'
      << "S " << format_number(r.s_param) << '\n'
      << "source " << r.source << '\n'
      << "violation_count " << r.result.violation_count << '\n'
      << "empirical_violation_rate " << format_number(r.result.empirical_violation_rate) << '\n'
      << "exact_probability " << format_number(r.exact_probability) << '\n'
      << "gap " << format_number(r.gap) << '\n'
      << "band_3sigma " << format_number(r.band) << '\n'
      << "within_band " << (r.within_band() ? "true" : "false") << '\n'
      << "s_prime_mean " << format_number(r.result.mean_s_prime) << '\n'
      << "s_prime_min " << format_number(r.result.min_s_prime) << '\n'
      << "s_prime_max " << format_number(r.result.max_s_prime) << '\n';
}

inline void cmd_simulate(const SimulateConfig& config, std::ostream& out) {
  require_usage(config.format != Format::kCsv, "simulate output format must be text or json");
  write_simulation(run_simulation(config), config.format, out);
}

// ---------------------------------------------------------------------------
// invert

struct InvertConfig {
  std::optional<double> gamma;
  std::optional<std::string> state;
  std::optional<std::string> settings;
  std::optional<std::string> joint_path;
  Format format = Format::kText;
};

struct InvertReport {
  double gamma = 0.0;
  std::optional<JointDistribution16> noisy;
  std::optional<QuasiDistribution16> quasi;
  SQuasiDistribution s_quasi;
  double s_param = 0.0;

  double min_entry() const { return quasi->min_entry(); }
  bool joint_negative() const { return quasi->has_negative_entry(); }
  bool exceeds_classical_bound() const { return exceeds_bound(s_param, 2.0); }
  /// Bell-level negativity: the quasi-law of s has a negative weight.
  bool negativity() const { return s_quasi.q_plus2 < -kNegativeFloor || s_quasi.q_minus2 < -kNegativeFloor; }
};

inline InvertReport run_inversion(const InvertConfig& config) {
  require_usage(config.gamma.has_value(), "--gamma is required");
  require_usage(std::abs(*config.gamma) <= 1.0, "--gamma must satisfy |gamma| <= 1");
  const bool from_state = config.state.has_value() || config.settings.has_value();
  require_usage(from_state != config.joint_path.has_value(), "give either --state/--settings or --joint");
  require_usage(config.state.has_value() == config.settings.has_value(), "--state and --settings go together");

  InvertReport report;
  report.gamma = *config.gamma;
  const auto gammas = GammaFactors::equal(report.gamma);
  if (from_state) {
    report.noisy = noisy_joint_distribution(io::resolve_state(*config.state), io::resolve_settings(*config.settings), gammas);
  } else {
    report.noisy = io::joint_from_json(io::load_json_file(*config.joint_path));
  }
  report.quasi = invert_joint(*report.noisy, gammas);
  report.s_quasi = s_quasi_distribution_of(*report.quasi);
  report.s_param = mean_s(report.quasi->values());
  return report;
}

inline void write_inversion(const InvertReport& r, Format format, std::ostream& out) {
  if (format == Format::kJson) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["gamma"] = r.gamma;
    doc["quasi_distribution"] = io::outcomes_to_json(*r.quasi);
    doc["min_entry"] = r.min_entry();
    doc["joint_negative"] = r.joint_negative();
    doc["s_quasi"] = {{"plus2", r.s_quasi.q_plus2}, {"minus2", r.s_quasi.q_minus2}};
    doc["S"] = r.s_param;
    doc["exceeds_classical_bound"] = r.exceeds_classical_bound();
    doc["negativity"] = r.negativity();
    out << doc.dump(2) << '\n';
    return;
  }
  out << "gamma " << format_number(r.gamma) << '\n';
  out << "quasi_distribution (x y u v)\n";
  for (std::size_t i = 0; i < kOutcomeCount; ++i) {
    out << "  " << to_string(Outcome4::from_index(i)) << ' ' << format_number((*r.quasi)[i]) << '\n';
  }
  out << "min_entry " << format_number(r.min_entry()) << '\n'
      << "joint_negative " << (r.joint_negative() ? "true" : "false") << '\n'
      << "s_quasi(+2) " << format_number(r.s_quasi.q_plus2) << '\n'
      << "s_quasi(-2) " << format_number(r.s_quasi.q_minus2) << '\n'
      << "S " << format_number(r.s_param) << '\n'
      << "exceeds_classical_bound " << (r.exceeds_classical_bound() ? "true" : "false") << '\n'
      << "negativity " << (r.negativity() ? "true" : "false") << '\n';
}

inline void cmd_invert(const InvertConfig& config, std::ostream& out) {
  require_usage(config.format != Format::kCsv, "invert output format must be text or json");
  write_inversion(run_inversion(config), config.format, out);
}

// ---------------------------------------------------------------------------
// selfcheck

/// Runs every invariant suite; true when all pass.
inline bool cmd_selfcheck(std::ostream& out) {
  bool all_passed = true;
  for (const auto& suite : selfcheck::all_suites()) {
    selfcheck::SuiteResult r{"(unnamed suite)", false, ""};
    try {
      r = suite();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("threw: ") + e.what();
    }
    all_passed = all_passed && r.passed;
    out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
  }
  out << (all_passed ? "selfcheck passed\n" : "selfcheck FAILED\n");
  return all_passed;
}

}  // namespace bellstat::cli
