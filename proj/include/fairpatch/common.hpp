// Copyright 2026 The fairpatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairpatch {

inline constexpr int kSchemaVersion = 1;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (out-of-range hyperparameters, etc).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input does not have the expected shape or columns.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Input has the right shape but unusable content.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Weighted draw could not be completed.
class SamplingError : public Error {
 public:
  using Error::Error;
};

using Warnings = std::vector<std::string>;

/// Sign with the convention sign(0) = +1 used for every vote aggregate.
template <typename T>
constexpr int sign_of(T value) noexcept {
  return value < T{0} ? -1 : +1;
}

}  // namespace fairpatch
