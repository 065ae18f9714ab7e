// Copyright 2026 The ringsqz Authors
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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ringsqz {

// Base for every error raised by the library. The kind drives the CLI exit code.
class Error : public std::runtime_error {
 public:
  enum class Kind { kDomain, kSingularity, kDegenerateData, kFit, kFormat };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// An argument violates a documented precondition (negative rate, efficiency > 1, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(Kind::kDomain, what) {}
};

// The cavity response is evaluated on (or numerically at) the parametric threshold.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double gain, double detuning, double sideband)
      : Error(Kind::kSingularity, what), gain_(gain), detuning_(detuning), sideband_(sideband) {}

  double gain() const noexcept { return gain_; }
  double detuning() const noexcept { return detuning_; }
  double sideband() const noexcept { return sideband_; }

 private:
  double gain_;
  double detuning_;
  double sideband_;
};

// Data carries no information for the requested estimator (zero mean, zero variance).
class DegenerateDataError : public Error {
 public:
  explicit DegenerateDataError(const std::string& what) : Error(Kind::kDegenerateData, what) {}
};

// Least-squares fit failed to converge or the normal equations are singular.
class FitError : public Error {
 public:
  FitError(const std::string& what, double residual_norm)
      : Error(Kind::kFit, what), residual_norm_(residual_norm) {}

  double residual_norm() const noexcept { return residual_norm_; }

 private:
  double residual_norm_;
};

// Malformed input file. byte_offset points at the first offending byte when known.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, std::int64_t byte_offset = -1)
      : Error(Kind::kFormat, what), byte_offset_(byte_offset) {}

  std::int64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::int64_t byte_offset_;
};

}  // namespace ringsqz
