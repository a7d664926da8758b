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

#include "bellstat/cli.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

using namespace bellstat;
using namespace bellstat::cli;

namespace {

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
const double kTsirelson = 2.0 * std::numbers::sqrt2;

const SweepRow& row_for(const std::vector<SweepRow>& rows, double s, std::int64_t n) {
  for (const auto& r : rows)
    if (r.s_param == s && r.trials == n) return r;
  throw std::runtime_error("row not found");
}

std::string run_curve(const SweepConfig& c) {
  std::ostringstream out;
  cmd_violation_curve(c, out);
  return out.str();
}

}  // namespace

TEST(ViolationCurve, FigureOneRows) {
  SweepConfig c;
  c.gamma = kInvSqrt2;
  c.s_values = {0.0, 2.0, kTsirelson};
  c.n_min = 1;
  c.n_max = 4000;
  c.n_step = 1;
  c.outputs = Outputs::kExact;
  const auto rows = compute_violation_curve(c);
  EXPECT_EQ(rows.size(), 3U * 4000U);
  EXPECT_EQ(row_for(rows, 0.0, 1).p_exact, 1.0);
  EXPECT_GT(row_for(rows, kTsirelson, 1000).p_exact, 0.99);
  EXPECT_LT(std::abs(row_for(rows, 2.0, 4000).p_exact - 0.5), 0.02);
}

TEST(ViolationCurve, CsvFormat) {
  SweepConfig c;
  c.s_values = {0.0, kTsirelson};
  c.n_min = 1;
  c.n_max = 3;
  const std::string csv = run_curve(c);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "S,N,p_exact,p_gauss");
  std::string first;
  std::getline(lines, first);
  EXPECT_EQ(first, "0,1,1,1");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_NE(csv.find("2.82842712475,2,"), std::string::npos);
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");

  c.outputs = Outputs::kGauss;
  std::istringstream gauss_only(run_curve(c));
  std::getline(gauss_only, header);
  EXPECT_EQ(header, "S,N,p_gauss");
}

TEST(ViolationCurve, JsonFormat) {
  SweepConfig c;
  c.s_values = {2.0};
  c.gamma = 1.0;
  c.n_min = 5;
  c.n_max = 6;
  c.format = Format::kJson;
  const auto doc = nlohmann::json::parse(run_curve(c));
  EXPECT_EQ(doc["schema_version"], kSchemaVersion);
  ASSERT_EQ(doc["rows"].size(), 2U);
  EXPECT_EQ(doc["rows"][0]["N"], 5);
  EXPECT_TRUE(doc["rows"][0]["p_gauss"].is_null());  // degenerate Gaussian at |g^2 S| = 2
  EXPECT_EQ(doc["rows"][0]["p_exact"], 0.0);
}

TEST(ViolationCurve, OutputIndependentOfThreads) {
  SweepConfig c;
  c.s_values = {0.0, 2.0, kTsirelson};
  c.n_max = 300;
  const std::string serial = run_curve(c);
  c.threads = 4;
  EXPECT_EQ(run_curve(c), serial);
}

TEST(ViolationCurve, StateDerivedS) {
  SweepConfig c;
  c.state = "singlet";
  c.settings = "chsh-optimal";
  c.n_min = 1000;
  c.n_max = 1000;
  const auto rows = compute_violation_curve(c);
  ASSERT_EQ(rows.size(), 1U);
  EXPECT_NEAR(rows[0].s_param, kTsirelson, 1e-12);
  EXPECT_GT(rows[0].p_exact, 0.99);
}

TEST(ViolationCurve, ConfigFile) {
  const auto c = sweep_config_from_json(io::load_json_file(std::string(BELLSTAT_SAMPLES_DIR) + "/fig1.json"));
  EXPECT_NEAR(c.gamma, kInvSqrt2, 1e-15);
  EXPECT_EQ(c.s_values.size(), 3U);
  EXPECT_EQ(c.n_max, 200);
  EXPECT_THROW(sweep_config_from_json(nlohmann::json{{"n_min", "x"}}), usage_error);
  EXPECT_THROW(sweep_config_from_json(nlohmann::json{{"outputs", "none"}}), usage_error);
}

TEST(ViolationCurve, UsageErrors) {
  SweepConfig c;
  c.s_values = {0.0};
  c.n_min = 0;
  EXPECT_THROW(compute_violation_curve(c), usage_error);
  c.n_min = 10;
  c.n_max = 5;
  EXPECT_THROW(compute_violation_curve(c), usage_error);
  c.n_max = 20;
  c.gamma = 1.0;
  c.s_values = {kTsirelson};
  EXPECT_THROW(compute_violation_curve(c), usage_error);
  c.s_values.clear();
  EXPECT_THROW(compute_violation_curve(c), usage_error);
  c.s_values = {0.0};
  c.state = "singlet";
  EXPECT_THROW(compute_violation_curve(c), usage_error);
}

TEST(Simulate, SingleTrialRateIsOne) {
  SimulateConfig c;
  c.trials = 1;
  c.reps = 1000;
  c.gamma = 0.7071;
  c.s_param = 0.0;
  c.seed = 7;
  const auto r = run_simulation(c);
  EXPECT_EQ(r.result.empirical_violation_rate, 1.0);
  EXPECT_EQ(r.exact_probability, 1.0);
  EXPECT_TRUE(r.within_band());
}

TEST(Simulate, SingletWithinBand) {
  SimulateConfig c;
  c.trials = 100;
  c.reps = 10000;
  c.gamma = 0.7071;
  c.state = "singlet";
  c.settings = "chsh-optimal";
  c.seed = 1;
  const auto r = run_simulation(c);
  EXPECT_EQ(r.source, "joint");
  EXPECT_NEAR(r.s_param, kTsirelson, 1e-12);
  EXPECT_TRUE(r.within_band()) << r.gap << " vs " << r.band;
}

TEST(Simulate, ByteIdenticalReports) {
  SimulateConfig c;
  c.trials = 100;
  c.reps = 5000;
  c.gamma = 0.7071;
  c.state = "singlet";
  c.settings = "chsh-optimal";
  c.seed = 1;
  std::ostringstream a;
  std::ostringstream b;
  std::ostringstream d;
  cmd_simulate(c, a);
  cmd_simulate(c, b);
  c.workers = 6;
  cmd_simulate(c, d);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), d.str());
  c.format = Format::kJson;
  std::ostringstream j;
  cmd_simulate(c, j);
  EXPECT_EQ(nlohmann::json::parse(j.str())["violation_count"].get<std::int64_t>(),
            run_simulation(c).result.violation_count);
}

TEST(Simulate, UsageErrors) {
  SimulateConfig c;
  c.trials = 10;
  c.reps = 10;
  EXPECT_THROW(run_simulation(c), usage_error);  // no gamma
  c.gamma = 0.5;
  EXPECT_THROW(run_simulation(c), usage_error);  // no S
  c.s_param = 1.0;
  c.state = "singlet";
  c.settings = "chsh-optimal";
  EXPECT_THROW(run_simulation(c), usage_error);  // both
  c.state.reset();
  c.settings.reset();
  c.gamma = 1.0;
  c.s_param = 3.0;
  EXPECT_THROW(run_simulation(c), usage_error);
}

TEST(Invert, Singlet) {
  InvertConfig c;
  c.gamma = kInvSqrt2;
  c.state = "singlet";
  c.settings = "chsh-optimal";
  const auto r = run_inversion(c);
  EXPECT_TRUE(r.negativity());
  EXPECT_TRUE(r.joint_negative());
  EXPECT_TRUE(r.exceeds_classical_bound());
  EXPECT_NEAR(r.s_param, kTsirelson, 1e-10);
  EXPECT_NEAR(r.s_quasi.q_minus2, 0.5 - kTsirelson / 4.0, 1e-10);
}

TEST(Invert, MaximallyMixed) {
  InvertConfig c;
  c.gamma = kInvSqrt2;
  c.state = "maximally-mixed";
  c.settings = "chsh-optimal";
  const auto r = run_inversion(c);
  EXPECT_FALSE(r.negativity());
  EXPECT_FALSE(r.joint_negative());
  EXPECT_NEAR(r.s_param, 0.0, 1e-12);
  EXPECT_NEAR(r.min_entry(), 1.0 / 16.0, 1e-12);
}

TEST(Invert, ProductStateOnTheBorder) {
  InvertConfig c;
  c.gamma = 0.5;  // parallel directions need |gx| + |gy| <= 1
  c.state = "product-00";
  c.settings = "all-z";
  const auto r = run_inversion(c);
  EXPECT_NEAR(r.s_param, 2.0, 1e-10);
  EXPECT_FALSE(r.negativity());
  EXPECT_FALSE(r.exceeds_classical_bound());

  c.gamma = kInvSqrt2;
  EXPECT_THROW(run_inversion(c), domain_error);
}

TEST(Invert, ZeroGammaIsSingular) {
  InvertConfig c;
  c.gamma = 0.0;
  c.state = "singlet";
  c.settings = "chsh-optimal";
  EXPECT_THROW(run_inversion(c), singular_inversion_error);
}

TEST(Invert, FromDistributionFile) {
  InvertConfig c;
  c.gamma = 0.7;
  c.joint_path = std::string(BELLSTAT_SAMPLES_DIR) + "/uniform_joint.json";
  c.format = Format::kJson;
  std::ostringstream out;
  cmd_invert(c, out);
  const auto doc = nlohmann::json::parse(out.str());
  EXPECT_FALSE(doc["negativity"].get<bool>());
  EXPECT_NEAR(doc["quasi_distribution"]["-+-+"].get<double>(), 1.0 / 16.0, 1e-12);
  c.state = "singlet";
  EXPECT_THROW(run_inversion(c), usage_error);
}

TEST(Selfcheck, AllSuitesPass) {
  std::ostringstream out;
  EXPECT_TRUE(cmd_selfcheck(out)) << out.str();
  EXPECT_NE(out.str().find("[PASS] kernel-composition"), std::string::npos);
  EXPECT_NE(out.str().find("[PASS] route-equivalence: 0 mismatches"), std::string::npos);
}
