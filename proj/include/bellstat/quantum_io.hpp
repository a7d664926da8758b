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
#include <fstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "bellstat/errors.hpp"
#include "bellstat/outcome.hpp"
#include "bellstat/quantum.hpp"

// JSON forms accepted for states, settings and 16-outcome distributions.
//
// State:
//   {"name": "singlet" | "product-00" | "maximally-mixed"}
//   {"name": "werner", "p": 0.8}
//   {"real": [[...4...] x4], "imag": [[...4...] x4]}   ("imag" optional)
// Settings:
//   {"name": "chsh-optimal" | "all-z"}
//   {"a_x": [x,y,z], "a_y": [...], "b_u": [...], "b_v": [...]}
// Distribution over xi = (x, y, u, v):
//   {"probabilities": [16 numbers]} or a bare array of 16 numbers, ordered by
//   Outcome4::index() (bit 3 = x, ..., bit 0 = v; set bit = -1), or
//   {"outcomes": {"++++": p, "+++-": p, ...}} keyed by to_string(Outcome4).
//
// The CLI also accepts the shorthands "singlet", "werner:0.8", "all-z", ...
// in place of a file path.

namespace bellstat::io {

using nlohmann::json;

inline TwoQubitState named_state(std::string_view name) {
  if (name == "singlet") return TwoQubitState::singlet();
  if (name == "product-00" || name == "00") return TwoQubitState::product_zero();
  if (name == "maximally-mixed" || name == "mixed") return TwoQubitState::maximally_mixed();
  if (name.starts_with("werner:")) {
    const std::string value(name.substr(7));
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    detail::require(used == value.size() && used > 0, "werner: cannot parse p from '" + value + "'");
    return TwoQubitState::werner(p);
  }
  throw domain_error("unknown state '" + std::string(name) + "'");
}

inline MeasurementSettings named_settings(std::string_view name) {
  if (name == "chsh-optimal") return MeasurementSettings::chsh_optimal();
  if (name == "all-z") return MeasurementSettings::all_z();
  throw domain_error("unknown settings '" + std::string(name) + "'");
}

inline TwoQubitState state_from_json(const json& doc) {
  detail::require(doc.is_object(), "state: expected a JSON object");
  if (doc.contains("name")) {
    const auto name = doc.at("name").get<std::string>();
    if (name == "werner") return TwoQubitState::werner(doc.at("p").get<double>());
    return named_state(name);
  }
  Matrix4 rho;
  auto read_part = [&](const char* key, bool imaginary) {
    if (!doc.contains(key)) return;
    const json& rows = doc.at(key);
    detail::require(rows.is_array() && rows.size() == 4, std::string("state: '") + key + "' must be 4x4");
    for (std::size_t r = 0; r < 4; ++r) {
      detail::require(rows[r].is_array() && rows[r].size() == 4, std::string("state: '") + key + "' must be 4x4");
      for (std::size_t c = 0; c < 4; ++c) {
        const double v = rows[r][c].get<double>();
        rho(r, c) += imaginary ? Complex{0.0, v} : Complex{v, 0.0};
      }
    }
  };
  detail::require(doc.contains("real"), "state: needs 'name' or 'real'");
  read_part("real", false);
  read_part("imag", true);
  return TwoQubitState(rho);
}

inline MeasurementSettings settings_from_json(const json& doc) {
  detail::require(doc.is_object(), "settings: expected a JSON object");
  if (doc.contains("name")) return named_settings(doc.at("name").get<std::string>());
  auto vec = [&](const char* key) {
    detail::require(doc.contains(key), std::string("settings: missing '") + key + "'");
    const auto v = doc.at(key).get<std::vector<double>>();
    detail::require(v.size() == 3, std::string("settings: '") + key + "' must have 3 components");
    return Vec3{v[0], v[1], v[2]};
  };
  return {vec("a_x"), vec("a_y"), vec("b_u"), vec("b_v")};
}

inline JointDistribution16 joint_from_json(const json& doc) {
  JointDistribution16::Array probs{};
  if (doc.is_object() && doc.contains("outcomes")) {
    probs.fill(0.0);
    for (const auto& [label, value] : doc.at("outcomes").items()) {
      detail::require(label.size() == 4, "distribution: bad outcome label '" + label + "'");
      std::array<int, 4> s{};
      for (std::size_t i = 0; i < 4; ++i) {
        detail::require(label[i] == '+' || label[i] == '-', "distribution: bad outcome label '" + label + "'");
        s[i] = label[i] == '+' ? 1 : -1;
      }
      probs[Outcome4{s[0], s[1], s[2], s[3]}.index()] = value.get<double>();
    }
    return JointDistribution16(probs);
  }
  const json& arr = doc.is_object() ? doc.at("probabilities") : doc;
  detail::require(arr.is_array() && arr.size() == kOutcomeCount, "distribution: expected 16 probabilities");
  for (std::size_t i = 0; i < kOutcomeCount; ++i) probs[i] = arr[i].get<double>();
  return JointDistribution16(probs);
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  detail::require(in.good(), "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw domain_error("'" + path + "': " + e.what());
  }
}

/// Named state, "werner:<p>", or a path to a JSON state document.
inline TwoQubitState resolve_state(const std::string& ref) {
  try {
    return named_state(ref);
  } catch (const domain_error&) {
    if (ref.starts_with("werner:")) throw;
  }
  return state_from_json(load_json_file(ref));
}

/// Named settings or a path to a JSON settings document.
inline MeasurementSettings resolve_settings(const std::string& ref) {
  if (ref == "chsh-optimal" || ref == "all-z") return named_settings(ref);
  return settings_from_json(load_json_file(ref));
}

template <typename Distribution>
json outcomes_to_json(const Distribution& d) {
  json out = json::object();
  for (std::size_t i = 0; i < kOutcomeCount; ++i) out[to_string(Outcome4::from_index(i))] = d[i];
  return out;
}

}  // namespace bellstat::io
