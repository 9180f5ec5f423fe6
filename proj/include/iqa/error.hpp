// Copyright 2026 The iqastack Authors. All Rights Reserved.
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

namespace iqa {

/// Base of every error raised by the library. The three subclasses map onto
/// the CLI exit codes (config 2, data 3, numeric 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, out-of-range parameters, violated preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Missing files, undecodable images, malformed datasets.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or singular numerics (zero variance, rank deficiency).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace iqa
