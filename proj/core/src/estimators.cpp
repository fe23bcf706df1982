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
#include <tsivr/estimators.hpp>

#include <cmath>
#include <vector>

namespace tsivr {

WeightSequence importance_weights(const Trajectory& tau, const EvaluatedPolicy& behavior,
                                  const EvaluatedPolicy& target) {
  const auto H = static_cast<Eigen::Index>(tau.horizon());
  WeightSequence w;
  w.weights.resize(H);
  w.log_weights.resize(H);
  double log_w = 0.0;
  for (Eigen::Index t = 0; t < H; ++t) {
    const auto& st = tau.steps[static_cast<std::size_t>(t)];
    log_w += target.log_probs(st.state, st.action) - behavior.log_probs(st.state, st.action);
    w.log_weights[t] = log_w;
    w.weights[t] = std::exp(log_w);
  }
  return w;
}

WeightSequence importance_weights(const Trajectory& tau, const PolicyParams& behavior,
                                  const PolicyParams& target, const FeatureMap& fm) {
  if (behavior.theta == target.theta) {
    const auto H = static_cast<Eigen::Index>(tau.horizon());
    return {Vector::Ones(H), Vector::Zero(H)};
  }
  return importance_weights(tau, EvaluatedPolicy::evaluate(fm, behavior), EvaluatedPolicy::evaluate(fm, target));
}

double weight_bound(std::size_t t, double lipschitz_grad_bound, double param_distance) {
  return std::exp(2.0 * static_cast<double>(t + 1) * lipschitz_grad_bound * param_distance);
}

void accumulate_occupancy(const Trajectory& tau, const WeightSequence* weights, double gamma,
                          std::size_t num_actions, double scale, Eigen::Ref<Vector> out) {
  double discount = scale;
  for (std::size_t t = 0; t < tau.horizon(); ++t) {
    const auto& st = tau.steps[t];
    const double w = weights ? weights->weights[static_cast<Eigen::Index>(t)] : 1.0;
    out[static_cast<Eigen::Index>(st.state * num_actions + st.action)] += discount * w;
    discount *= gamma;
  }
}

void accumulate_pg(const Trajectory& tau, const WeightSequence* weights, const FeatureMap& fm,
                   const PolicyParams& target, const EvaluatedPolicy& target_policy,
                   std::span<const double> quasi_reward, double gamma, double scale, Eigen::Ref<Vector> out) {
  const auto H = tau.horizon();
  const auto A = fm.num_actions();
  if (quasi_reward.size() != fm.num_states() * A) throw std::invalid_argument("quasi-reward has wrong size");
  std::vector<double> suffix(H + 1, 0.0);
  {
    std::vector<double> coeff(H);
    double discount = 1.0;
    for (std::size_t t = 0; t < H; ++t) {
      const auto& st = tau.steps[t];
      const double w = weights ? weights->weights[static_cast<Eigen::Index>(t)] : 1.0;
      coeff[t] = discount * w * quasi_reward[st.state * A + st.action];
      discount *= gamma;
    }
    for (std::size_t t = H; t-- > 0;) suffix[t] = suffix[t + 1] + coeff[t];
  }
  for (std::size_t t = 0; t < H; ++t) {
    if (suffix[t] == 0.0) continue;
    const auto& st = tau.steps[t];
    add_log_policy_grad(fm, target, target_policy, st.state, st.action, scale * suffix[t], out);
  }
}

OccupancyVector occupancy_estimate(const Trajectory& tau, const PolicyParams& behavior,
                                   const PolicyParams& target, const FeatureMap& fm, double gamma) {
  const auto w = importance_weights(tau, behavior, target, fm);
  OccupancyVector occ;
  occ.kind = OccupancyKind::sampled;
  occ.horizon = tau.horizon();
  occ.entries = Vector::Zero(static_cast<Eigen::Index>(fm.num_states() * fm.num_actions()));
  accumulate_occupancy(tau, &w, gamma, fm.num_actions(), 1.0, occ.entries);
  return occ;
}

OccupancyVector occupancy_estimate(const Trajectory& tau, std::size_t num_states, std::size_t num_actions,
                                   double gamma) {
  OccupancyVector occ;
  occ.kind = OccupancyKind::sampled;
  occ.horizon = tau.horizon();
  occ.entries = Vector::Zero(static_cast<Eigen::Index>(num_states * num_actions));
  accumulate_occupancy(tau, nullptr, gamma, num_actions, 1.0, occ.entries);
  return occ;
}

Vector pg_estimate(const Trajectory& tau, const PolicyParams& behavior, const PolicyParams& target,
                   const FeatureMap& fm, std::span<const double> quasi_reward, double gamma) {
  const auto target_policy = EvaluatedPolicy::evaluate(fm, target);
  const auto w = importance_weights(tau, EvaluatedPolicy::evaluate(fm, behavior), target_policy);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(fm.dim()));
  accumulate_pg(tau, &w, fm, target, target_policy, quasi_reward, gamma, 1.0, g);
  return g;
}

Vector pg_estimate(const Trajectory& tau, const PolicyParams& theta, const FeatureMap& fm,
                   std::span<const double> quasi_reward, double gamma) {
  const auto pol = EvaluatedPolicy::evaluate(fm, theta);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(fm.dim()));
  accumulate_pg(tau, nullptr, fm, theta, pol, quasi_reward, gamma, 1.0, g);
  return g;
}

}  // namespace tsivr
