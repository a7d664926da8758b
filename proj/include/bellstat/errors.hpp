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

#include <stdexcept>
#include <string>

namespace bellstat {

/// Raised when an input lies outside the mathematical domain of an operation
/// (|gamma| > 1, invalid distributions, non-unit Bloch vectors, ...).
class domain_error : public std::domain_error {
 public:
  explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

/// Inversion of a noise kernel with gamma = 0, where the kernel is rank one.
class singular_inversion_error : public domain_error {
 public:
  explicit singular_inversion_error(const std::string& what) : domain_error(what) {}
};

/// Gaussian approximation requested for a zero-variance binomial law.
class degenerate_distribution_error : public domain_error {
 public:
  explicit degenerate_distribution_error(const std::string& what) : domain_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw domain_error(message);
}

}  // namespace detail
}  // namespace bellstat
