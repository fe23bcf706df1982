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

#include <tsivr/estimators.hpp>
#include <tsivr/mdp.hpp>
#include <tsivr/policy.hpp>
#include <tsivr/trace.hpp>
#include <tsivr/utilities.hpp>

#include <cstdint>
#include <span>
#include <string>

namespace tsivr {

struct AlgoConfig {
  std::size_t N = 100;  // anchor batch
  std::size_t B = 10;   // inner batch
  std::size_t m = 10;   // epoch length
  std::size_t H = 200;  // trajectory length
  double eta = 0.1;
  double delta = 0.01;  // truncation radius
  std::size_t T = 1;    // epochs
  double gamma = 0.99;
  std::uint64_t seed = 0;
  bool truncation_enabled = true;

  std::size_t threads = 1;             // batch sampling workers; results do not depend on it
  std::size_t exact_eval_every = 0;    // iterations between exact objective evaluations, 0 = never
  std::size_t exact_eval_horizon = 0;  // 0 = infinite-horizon occupancy
  double weight_guard = 1e12;          // untruncated ablation only
  std::string checkpoint_dir;          // empty = no checkpoints

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct BatchDiagnostics {
  double max_weight = 1.0;
  double weight_bound = 1.0;     // exp(2 H l_psi |theta_j - theta_{j-1}|), ceiling for omega_{H-1}
  double param_distance = 0.0;   // ||theta_j - theta_{j-1}||
  std::size_t bound_violations = 0;
  std::vector<EpisodeReturn> episodes;
};

/// Recursive estimator state at inner iteration j of an epoch.
struct EpochState {
  PolicyParams theta;       // theta_j
  PolicyParams theta_prev;  // theta_{j-1}; equals theta at j = 0
  OccupancyVector lambda_est;
  Vector quasi_reward;       // r_j = grad F(lambda_j)
  Vector quasi_reward_prev;  // r_{j-1}; r_0 at j = 0
  Vector grad_est;           // g_j
  std::size_t epoch_index = 0;
  std::size_t inner_index = 0;
  BatchDiagnostics diagnostics;
};

/// Trajectories with probability weights summing to one. Sampled batches use
/// uniform weights; enumeration tables plug in exact probabilities.
struct WeightedBatch {
  std::span<const Trajectory> trajectories;
  std::span<const double> weights;  // empty = uniform
};

/// Shared problem context for the estimator updates.
struct Problem {
  const MdpModel& model;
  const FeatureMap& fm;
  const Utility& utility;
};

/// Anchor estimates from a batch drawn under theta0: lambda_0 = mean lambda_hat,
/// r_0 = grad F(lambda_0), g_0 = mean g_hat(tau | theta0, r_0); r_{-1} := r_0.
EpochState anchor_from_batch(const Problem& problem, const PolicyParams& theta0, const WeightedBatch& batch,
                             double gamma);

/// One recursive update from a batch drawn under theta (= theta_j):
///   lambda_j = lambda_{j-1} + mean[lambda_hat(tau | theta_j) - lambda_hat_w(tau | theta_j, theta_{j-1})]
///   g_j      = g_{j-1} + mean[g_hat(tau | theta_j, r_{j-1}) - g_hat_w(tau | theta_j, theta_{j-1}, r_{j-2})]
/// Both corrections use the same batch.
EpochState inner_from_batch(const Problem& problem, const EpochState& prev, const PolicyParams& theta,
                            const WeightedBatch& batch, double gamma);

/// N independent trajectories under pi_theta with per-trajectory streams
/// derived from (seed, epoch, inner, index).
std::vector<Trajectory> sample_batch(const MdpModel& model, const PolicyMatrix& policy, std::size_t horizon,
                                     std::size_t count, std::uint64_t seed, std::size_t epoch, std::size_t inner,
                                     std::size_t threads = 1);

/// Samples N trajectories under theta0 and builds the anchor state.
EpochState epoch_anchor(const Problem& problem, const PolicyParams& theta0, const AlgoConfig& cfg,
                        std::size_t epoch);

/// Samples B trajectories under theta (the iterate produced by the last step)
/// and advances the recursion. With truncation disabled, a weight above
/// cfg.weight_guard throws WeightExplosion.
EpochState inner_update(const Problem& problem, const EpochState& prev, const PolicyParams& theta,
                        const AlgoConfig& cfg);

/// theta + eta g when eta ||g|| <= delta, else theta + delta g / ||g||.
PolicyParams truncated_step(const PolicyParams& theta, const Vector& g, double eta, double delta);

/// (theta_+ - theta) / eta with theta_+ = truncated_step(theta, exact_grad, eta, delta).
Vector gradient_mapping(const PolicyParams& theta, const Vector& exact_grad, double eta, double delta);

/// Parameter choices tied to a target accuracy epsilon:
/// H = ceil(2 log(1/eps) / (1 - gamma)), delta = 1 / (2 H l_psi), B = m = ceil(1/eps),
/// N = ceil(1/eps^2), T = ceil(1/eps); the global-optimality variant runs
/// ceil(log2(1/eps)) epochs.
struct Schedule {
  std::size_t H = 0;
  double delta = 0.0;
  std::size_t B = 0;
  std::size_t m = 0;
  std::size_t N = 0;
  std::size_t T = 0;
  std::size_t T_global = 0;
  double total_samples = 0.0;  // T m (B H + N)
};

Schedule schedule_from_epsilon(double epsilon, double gamma, double lipschitz_grad_bound);

/// Smoothness and variance constants of the analysis, evaluated in closed form.
struct TheoryConstants {
  double lipschitz_grad_bound = 0.0;     // l_psi
  double lipschitz_hessian_bound = 0.0;  // L_psi
  double delta = 0.0;
  double L_theta = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;
  double eta = 0.0;         // stationarity step size
  double eta_global = 0.0;  // step-size ceiling for the global-optimality variant

  /// t (4 l_psi^2 (t + 1/2) + 2 L_psi) (e^{4 delta t} + 1)
  double c_omega(double t) const;
};

TheoryConstants compute_constants(double lipschitz_grad_bound, double lipschitz_hessian_bound,
                                  const UtilityConstants& utility, double gamma, std::size_t H, double delta);

/// Full optimizer: cfg.T epochs of cfg.m iterations; j = 0 is the anchor,
/// j >= 1 the recursive update, each followed by a truncated step.
RunResult run(const MdpModel& model, const FeatureMap& fm, const Utility& utility, const AlgoConfig& cfg,
              const PolicyParams& theta0);

/// Discounted and undiscounted reward sums of each trajectory under the
/// model's reward table; empty when the model has none.
std::vector<EpisodeReturn> episode_returns(const MdpModel& model, std::span<const Trajectory> batch, double gamma);

/// FNV-1a over the raw bytes of a vector, for checkpoint fingerprints.
std::uint64_t hash_vector(const Vector& v);

}  // namespace tsivr
