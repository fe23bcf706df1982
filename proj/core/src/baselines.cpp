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
#include <tsivr/baselines.hpp>
#include <tsivr/oracle.hpp>

#include <chrono>
#include <cmath>

namespace tsivr {
namespace {

// Keeps REINFORCE streams disjoint from the TSIVR-PG (epoch, inner) streams.
constexpr std::size_t kReinforceStream = 0x5e1f0c3dULL;

}  // namespace

void BaselineConfig::validate() const {
  auto fail = [](const char* field, const char* why) {
    throw std::invalid_argument(std::string(field) + ": " + why);
  };
  if (N == 0) fail("N", "must be >= 1");
  if (H == 0) fail("H", "must be >= 1");
  if (iterations == 0) fail("iterations", "must be >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) fail("eta", "must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma", "must lie in (0, 1)");
  if (threads == 0) fail("threads", "must be >= 1");
}

ReinforceEstimate reinforce_estimate(const Problem& problem, const PolicyParams& theta, const WeightedBatch& batch,
                                     double gamma) {
  // identical to the anchor estimate of an epoch
  auto anchor = anchor_from_batch(problem, theta, batch, gamma);
  return {std::move(anchor.lambda_est), std::move(anchor.quasi_reward), std::move(anchor.grad_est)};
}

ReinforceStep reinforce_step(const Problem& problem, const PolicyParams& theta, const BaselineConfig& cfg,
                             std::size_t iteration) {
  cfg.validate();
  const auto pol = EvaluatedPolicy::evaluate(problem.fm, theta);
  const auto batch =
      sample_batch(problem.model, pol.probs, cfg.H, cfg.N, cfg.seed, iteration, kReinforceStream, cfg.threads);
  ReinforceStep step;
  step.estimate = reinforce_estimate(problem, theta, {batch, {}}, cfg.gamma);
  step.theta = PolicyParams(theta.theta + cfg.eta * step.estimate.grad);
  step.episodes = episode_returns(problem.model, batch, cfg.gamma);
  return step;
}

RunResult run_reinforce(const MdpModel& model, const FeatureMap& fm, const Utility& utility,
                        const BaselineConfig& cfg, const PolicyParams& theta0) {
  cfg.validate();
  if (fm.num_states() != model.num_states() || fm.num_actions() != model.num_actions())
    throw std::invalid_argument("run_reinforce: feature map does not match the model");
  if (theta0.dim() != fm.dim()) throw std::invalid_argument("run_reinforce: initial parameters have wrong dimension");
  if (cfg.gamma != model.discount()) throw std::invalid_argument("gamma: does not match the model discount");

  const auto start = std::chrono::steady_clock::now();
  const Problem problem{model, fm, utility};
  RunResult result;
  PolicyParams theta = theta0;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    auto step = reinforce_step(problem, theta, cfg, it);
    if (!step.theta.finite()) throw NumericalFailure("run_reinforce: parameters became non-finite");
    IterationRecord rec;
    rec.epoch = it;
    rec.inner = 0;
    rec.trajectories = (it + 1) * cfg.N;
    rec.samples = rec.trajectories * cfg.H;
    rec.step_norm = (step.theta.theta - theta.theta).norm();
    rec.grad_norm = step.estimate.grad.norm();
    rec.lambda_l1 = step.estimate.lambda_mean.l1_norm();
    rec.utility_estimate = utility.value(step.estimate.lambda_mean.entries);
    if (!step.episodes.empty()) {
      double sum = 0.0;
      for (const auto& e : step.episodes) sum += e.discounted;
      rec.batch_return = sum / static_cast<double>(step.episodes.size());
      result.trace.episodes.insert(result.trace.episodes.end(), step.episodes.begin(), step.episodes.end());
    }
    if (cfg.exact_eval_every != 0 && it % cfg.exact_eval_every == 0)
      rec.exact_objective = exact_objective(model, fm, theta, utility, cfg.exact_eval_horizon);
    result.trace.iterations.push_back(rec);
    theta = std::move(step.theta);
  }
  result.final_params = theta;
  result.trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace tsivr
