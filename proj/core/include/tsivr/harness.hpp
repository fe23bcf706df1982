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

#include <tsivr/config.hpp>
#include <tsivr/mdp.hpp>
#include <tsivr/trace.hpp>

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace tsivr {

/// Linear-interpolation quantile (the "type 7" definition), q in [0, 1].
double quantile(std::vector<double> values, double q);

/// out[k] = mean of values[max(0, k - window + 1) .. k].
std::vector<double> moving_average(std::span<const double> values, std::size_t window);

struct CurvePoint {
  double episodes = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct CurveSummary {
  std::vector<CurvePoint> points;

  /// Header "episodes,median,q25,q75", %.10g numbers, LF line endings.
  void write_csv(std::ostream& out) const;
};

/// Cross-run median and quartiles of aligned series. x gives the episode
/// count of each column; every run must have the same length.
CurveSummary summarize(std::span<const double> x, const std::vector<std::vector<double>>& runs);

/// Smoothed episode-return curve: moving average, then sampled every
/// interval episodes and summarized across runs.
CurveSummary return_curve(const std::vector<std::vector<double>>& episode_returns, std::size_t window,
                          std::size_t interval);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares; DegenerateData when fewer than two distinct x values.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct Environment {
  std::shared_ptr<const MdpModel> model;
  std::shared_ptr<const FeatureMap> features;
  std::shared_ptr<const Utility> utility;
};

/// Builds the MDP, the feature map, and the utility named by the config.
Environment build_environment(const ExperimentConfig& cfg);

/// Initial parameters for run run_index, seeded from seed_base + run_index.
PolicyParams initial_params(const ExperimentConfig& cfg, const FeatureMap& fm, std::size_t run_index);

struct ExperimentResult {
  CurveSummary curve;                      // smoothed returns, or utility estimates for nonlinear runs
  std::optional<CurveSummary> exact_curve; // F(lambda(theta)) at exact-evaluation checkpoints and at the end
  std::vector<RunResult> runs;
};

/// Executes cfg.num_runs independent runs and writes, under cfg.output_dir:
///   curve.csv             cross-run summary
///   exact_curve.csv       when exact evaluations were requested
///   run_<k>.csv           per-iteration trace of run k
/// If a run fails, the completed runs are still written before the error propagates.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct SlopePoint {
  std::size_t N = 0, B = 0, m = 0;
  double episodes = 0.0;  // E (N + B m)
  double mean_return = 0.0;
  double gap = 0.0;
  double log_episodes = 0.0;
  double log_gap = 0.0;
  double std_log_gap = 0.0;
  bool dropped = false;  // nonpositive gap
};

struct SlopeResult {
  double optimal_value = 0.0;
  std::vector<SlopePoint> points;
  LineFit fit;
  std::vector<std::string> warnings;
};

/// Sample-complexity study: for each N runs TSIVR-PG for slope.epochs epochs
/// with B = m = ceil(sqrt N), averages the last final_window discounted
/// episode returns across runs, and fits log gap against log episodes.
/// Writes slope.csv and slope_fit.csv under cfg.output_dir.
SlopeResult slope_study(const ExperimentConfig& cfg);

/// Nonlinear-utility run: run_experiment with exact evaluations forced on.
ExperimentResult nonlinear_run(const ExperimentConfig& cfg);

}  // namespace tsivr
