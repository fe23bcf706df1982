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

#include <tsivr/baselines.hpp>
#include <tsivr/tsivr_pg.hpp>
#include <tsivr/utilities.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace tsivr {

/// Invalid experiment configuration. field() is a dotted path such as "tsivr_pg.eta".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& why)
      : std::runtime_error(field + ": " + why), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class ExperimentKind { curve, slope, nonlinear };
enum class Algorithm { tsivr_pg, reinforce };
enum class ReturnKind { undiscounted, discounted };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct UtilitySpec {
  std::string kind = "linear";  // linear | entropy | log_barrier | set_distance
  Vector reward;  // linear: empty = the environment reward table
  double sigma = kDefaultBarrierSigma;
  double floor = 1e-8;
  Matrix feedback;  // set_distance
  ConvexSet set = BallSet{};
};

struct InitSpec {
  std::string kind = "zero";  // zero | normal
  double scale = 0.0;         // standard deviation for normal
};

struct SlopeSpec {
  std::vector<std::size_t> N_values;
  std::size_t epochs = 10;
  std::size_t final_window = 50;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::curve;
  std::string environment = "frozenlake8x8";
  double gamma = 0.99;
  std::string feature_map = "tabular";
  Algorithm algorithm = Algorithm::tsivr_pg;
  UtilitySpec utility;
  AlgoConfig tsivr;
  BaselineConfig reinforce;
  InitSpec init;
  SlopeSpec slope;
  std::size_t num_runs = 10;
  std::uint64_t seed_base = 0;
  std::string output_dir = "out";
  std::size_t smoothing_window = 50;
  std::size_t curve_interval = 100;  // episodes between curve checkpoints
  ReturnKind returns = ReturnKind::undiscounted;
  std::size_t exact_eval_every = 0;
  std::size_t parallel_runs = 1;

  /// Throws ConfigError with the offending field path.
  void validate() const;
};

/// Structured text (YAML) configuration; see configs/ for annotated examples.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace tsivr
