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

#include <tsivr/mdp.hpp>
#include <tsivr/policy.hpp>

#include <span>

namespace tsivr {

/// omega_t = prod_{h <= t} pi_target(a_h | s_h) / pi_behavior(a_h | s_h) for a
/// trajectory drawn under the behavior policy. Accumulated in log space.
struct WeightSequence {
  Vector weights;
  Vector log_weights;

  double max() const { return weights.size() == 0 ? 1.0 : weights.maxCoeff(); }
};

WeightSequence importance_weights(const Trajectory& tau, const EvaluatedPolicy& behavior,
                                  const EvaluatedPolicy& target);
WeightSequence importance_weights(const Trajectory& tau, const PolicyParams& behavior,
                                  const PolicyParams& target, const FeatureMap& fm);

/// Deterministic ceiling exp(2 (t + 1) l_psi ||theta_1 - theta_2||) on omega_t.
double weight_bound(std::size_t t, double lipschitz_grad_bound, double param_distance);

/// out += scale * sum_t gamma^t omega_t e_{s_t a_t}. A null weight sequence
/// means the on-policy estimator (all weights 1).
void accumulate_occupancy(const Trajectory& tau, const WeightSequence* weights, double gamma,
                          std::size_t num_actions, double scale, Eigen::Ref<Vector> out);

/// out += scale * sum_t gamma^t omega_t r(s_t, a_t) sum_{t' <= t} grad log pi_target(a_t' | s_t').
///
/// Evaluated as sum_t' grad log pi(a_t' | s_t') * C_t' with C_t' the suffix
/// sum of the scalar coefficients, which costs O(H) feature-gradient calls.
void accumulate_pg(const Trajectory& tau, const WeightSequence* weights, const FeatureMap& fm,
                   const PolicyParams& target, const EvaluatedPolicy& target_policy,
                   std::span<const double> quasi_reward, double gamma, double scale, Eigen::Ref<Vector> out);

/// Off-policy occupancy estimate of lambda(target) from a behavior trajectory.
OccupancyVector occupancy_estimate(const Trajectory& tau, const PolicyParams& behavior,
                                   const PolicyParams& target, const FeatureMap& fm, double gamma);
/// On-policy discounted empirical distribution.
OccupancyVector occupancy_estimate(const Trajectory& tau, std::size_t num_states, std::size_t num_actions,
                                   double gamma);

/// Off-policy estimate of [grad_theta lambda(target)]^T r.
Vector pg_estimate(const Trajectory& tau, const PolicyParams& behavior, const PolicyParams& target,
                   const FeatureMap& fm, std::span<const double> quasi_reward, double gamma);
/// On-policy (REINFORCE / GPOMDP form) estimate.
Vector pg_estimate(const Trajectory& tau, const PolicyParams& theta, const FeatureMap& fm,
                   std::span<const double> quasi_reward, double gamma);

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace tsivr
