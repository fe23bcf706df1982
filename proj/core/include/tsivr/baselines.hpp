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

#include <tsivr/tsivr_pg.hpp>

namespace tsivr {

struct BaselineConfig {
  std::size_t N = 100;  // batch size
  std::size_t H = 200;
  double eta = 0.05;
  std::size_t iterations = 100;
  double gamma = 0.99;
  std::uint64_t seed = 0;

  std::size_t threads = 1;
  std::size_t exact_eval_every = 0;
  std::size_t exact_eval_horizon = 0;

  void validate() const;
};

/// Batch REINFORCE for a general utility: lambda_bar = batch occupancy mean,
/// r = grad F(lambda_bar), g = batch mean of the on-policy estimator with r.
struct ReinforceEstimate {
  OccupancyVector lambda_mean;
  Vector quasi_reward;
  Vector grad;
};

ReinforceEstimate reinforce_estimate(const Problem& problem, const PolicyParams& theta, const WeightedBatch& batch,
                                     double gamma);

struct ReinforceStep {
  PolicyParams theta;  // theta + eta g, untruncated
  ReinforceEstimate estimate;
  std::vector<EpisodeReturn> episodes;
};

/// Samples cfg.N trajectories on stream (seed, iteration) and takes one step.
ReinforceStep reinforce_step(const Problem& problem, const PolicyParams& theta, const BaselineConfig& cfg,
                             std::size_t iteration);

RunResult run_reinforce(const MdpModel& model, const FeatureMap& fm, const Utility& utility,
                        const BaselineConfig& cfg, const PolicyParams& theta0);

}  // namespace tsivr
