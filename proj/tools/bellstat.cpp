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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bellstat/cli.hpp"

namespace {

using bellstat::cli::ExitCode;

// Writes `text` to --out if given, else stdout.
void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw bellstat::cli::usage_error("cannot write '" + out_path + "'");
  out << text;
}

template <typename T>
std::optional<T> opt_if(const CLI::Option* option, const T& value) {
  return option->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-N statistics of a CHSH test run through a noisy joint measurement"};
  app.require_subcommand(1);

  std::string out_path;
  std::string format_name;

  // curve
  auto* curve = app.add_subcommand("curve", "Violation probability versus N (exact and Gaussian)");
  bellstat::cli::SweepConfig sweep;
  std::vector<double> curve_s;
  std::int64_t n_min = 1;
  std::int64_t n_max = 200;
  std::int64_t n_step = 1;
  unsigned curve_threads = 1;
  std::string config_path;
  std::string outputs_name = "both";
  std::string limits_name = "corrected";
  std::string curve_state;
  std::string curve_settings;
  double curve_gamma = sweep.gamma;
  curve->add_option("--config", config_path, "JSON file with SweepConfig fields (flags override)");
  auto* curve_gamma_opt = curve->add_option("--gamma", curve_gamma, "Common accuracy factor gamma");
  auto* curve_s_opt = curve->add_option("--S", curve_s, "CHSH value S (repeatable)")->allow_extra_args(false);
  auto* curve_state_opt = curve->add_option("--state", curve_state, "Named state or JSON file");
  auto* curve_settings_opt = curve->add_option("--settings", curve_settings, "Named settings or JSON file");
  auto* n_min_opt = curve->add_option("--n-min", n_min, "Smallest N");
  auto* n_max_opt = curve->add_option("--n-max", n_max, "Largest N");
  auto* n_step_opt = curve->add_option("--n-step", n_step, "Step in N");
  auto* outputs_opt = curve->add_option("--outputs", outputs_name, "exact | gauss | both");
  auto* limits_opt = curve->add_option("--gauss-limits", limits_name, "corrected | literal");
  auto* curve_format_opt = curve->add_option("--format", format_name, "csv | json");
  auto* curve_threads_opt = curve->add_option("--threads", curve_threads, "Worker threads");
  curve->add_option("--out", out_path, "Output file (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the violation rate");
  bellstat::cli::SimulateConfig sim;
  double sim_gamma = 0.0;
  double sim_s = 0.0;
  std::string sim_state;
  std::string sim_settings;
  simulate->add_option("--N", sim.trials, "Trials per experiment")->required();
  simulate->add_option("--reps", sim.reps, "Number of experiments")->required();
  simulate->add_option("--seed", sim.seed, "64-bit seed");
  auto* sim_gamma_opt = simulate->add_option("--gamma", sim_gamma, "Common accuracy factor gamma");
  auto* sim_s_opt = simulate->add_option("--S", sim_s, "CHSH value S");
  auto* sim_state_opt = simulate->add_option("--state", sim_state, "Named state or JSON file");
  auto* sim_settings_opt = simulate->add_option("--settings", sim_settings, "Named settings or JSON file");
  simulate->add_option("--threads", sim.workers, "Worker threads (does not change results)");
  auto* sim_format_opt = simulate->add_option("--format", format_name, "text | json");
  simulate->add_option("--out", out_path, "Output file (default stdout)");

  // invert
  auto* invert = app.add_subcommand("invert", "Noise-removed quasi-distribution and its negativity");
  bellstat::cli::InvertConfig inv;
  double inv_gamma = 0.0;
  std::string inv_state;
  std::string inv_settings;
  std::string inv_joint;
  auto* inv_gamma_opt = invert->add_option("--gamma", inv_gamma, "Common accuracy factor gamma");
  auto* inv_state_opt = invert->add_option("--state", inv_state, "Named state or JSON file");
  auto* inv_settings_opt = invert->add_option("--settings", inv_settings, "Named settings or JSON file");
  auto* inv_joint_opt = invert->add_option("--joint", inv_joint, "JSON file with a 16-outcome noisy distribution");
  auto* inv_format_opt = invert->add_option("--format", format_name, "text | json");
  invert->add_option("--out", out_path, "Output file (default stdout)");

  // selfcheck
  auto* selfcheck = app.add_subcommand("selfcheck", "Run the built-in invariant suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ExitCode::kUsageError;
  }

  try {
    std::ostringstream text;
    if (curve->parsed()) {
      if (!config_path.empty()) {
        sweep = bellstat::cli::sweep_config_from_json(bellstat::io::load_json_file(config_path));
      }
      if (curve_gamma_opt->count() > 0) sweep.gamma = curve_gamma;
      if (curve_s_opt->count() > 0) sweep.s_values = curve_s;
      if (curve_state_opt->count() > 0) sweep.state = curve_state;
      if (curve_settings_opt->count() > 0) sweep.settings = curve_settings;
      if (n_min_opt->count() > 0) sweep.n_min = n_min;
      if (n_max_opt->count() > 0) sweep.n_max = n_max;
      if (n_step_opt->count() > 0) sweep.n_step = n_step;
      if (curve_threads_opt->count() > 0) sweep.threads = curve_threads;
      if (outputs_opt->count() > 0) sweep.outputs = bellstat::cli::parse_outputs(outputs_name);
      if (limits_opt->count() > 0) sweep.limits = bellstat::cli::parse_limits(limits_name);
      if (curve_format_opt->count() > 0) sweep.format = bellstat::cli::parse_format(format_name);
      bellstat::cli::cmd_violation_curve(sweep, text);
    } else if (simulate->parsed()) {
      sim.gamma = opt_if(sim_gamma_opt, sim_gamma);
      sim.s_param = opt_if(sim_s_opt, sim_s);
      sim.state = opt_if(sim_state_opt, sim_state);
      sim.settings = opt_if(sim_settings_opt, sim_settings);
      if (sim_format_opt->count() > 0) sim.format = bellstat::cli::parse_format(format_name);
      bellstat::cli::cmd_simulate(sim, text);
    } else if (invert->parsed()) {
      inv.gamma = opt_if(inv_gamma_opt, inv_gamma);
      inv.state = opt_if(inv_state_opt, inv_state);
      inv.settings = opt_if(inv_settings_opt, inv_settings);
      inv.joint_path = opt_if(inv_joint_opt, inv_joint);
      if (inv_format_opt->count() > 0) inv.format = bellstat::cli::parse_format(format_name);
      bellstat::cli::cmd_invert(inv, text);
    } else if (selfcheck->parsed()) {
      const bool ok = bellstat::cli::cmd_selfcheck(text);
      emit(text.str(), out_path);
      return ok ? ExitCode::kSuccess : ExitCode::kSelfcheckFailure;
    }
    emit(text.str(), out_path);
  } catch (const bellstat::cli::usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return ExitCode::kUsageError;
  } catch (const bellstat::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return ExitCode::kDomainError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return ExitCode::kUsageError;
  }
  return ExitCode::kSuccess;
}
