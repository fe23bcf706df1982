// Copyright 2026 The tsivr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsivr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A linear solve or iteration that should not fail for a valid model did.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive enumeration would exceed its configured size cap.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Importance weights grew past the guard threshold (untruncated ablation only).
class WeightExplosion : public std::runtime_error {
 public:
  WeightExplosion(const std::string& what, double weight)
      : std::runtime_error(what), weight_(weight) {}
  double weight() const noexcept { return weight_; }

 private:
  double weight_;
};

/// Input data is rank deficient for a least-squares fit.
class DegenerateData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (MDP files, parameter files). Carries the line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tsivr
