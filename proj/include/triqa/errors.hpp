// Copyright 2026 The TRIQA Authors
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

namespace triqa {

/// Base class of every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Grouping tables, presets and other configuration that fails validation.
class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Unreadable, malformed or inconsistent input data (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite losses, degenerate statistics (exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kData = 2,
  kNumerical = 3,
};

}  // namespace triqa
