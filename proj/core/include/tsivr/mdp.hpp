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

#include <tsivr/rng.hpp>
#include <tsivr/types.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tsivr {

/// Finite discounted MDP with a dense transition tensor P(s' | s, a).
///
/// Immutable after construction. The constructor validates every row of the
/// kernel and the initial distribution and throws std::invalid_argument on
/// violation. Terminal states are expected to be encoded as zero-reward
/// self-loops so that every trajectory runs for the full horizon.
class MdpModel {
 public:
  struct Successor {
    std::uint32_t state;
    double cumulative;  // running sum of probabilities, last one is 1
  };

  MdpModel(std::size_t num_states, std::size_t num_actions, std::vector<double> transition,
           std::vector<double> initial_dist, double discount,
           std::optional<std::vector<double>> reward = std::nullopt);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  std::size_t num_pairs() const noexcept { return num_states_ * num_actions_; }
  double discount() const noexcept { return discount_; }

  std::size_t index(std::size_t s, std::size_t a) const noexcept { return s * num_actions_ + a; }

  /// Row P(. | s, a), length num_states().
  std::span<const double> transition(std::size_t s, std::size_t a) const noexcept {
    return {transition_.data() + index(s, a) * num_states_, num_states_};
  }
  double transition(std::size_t s, std::size_t a, std::size_t next) const noexcept {
    return transition_[index(s, a) * num_states_ + next];
  }
  std::span<const double> initial_dist() const noexcept { return initial_; }
  const std::optional<std::vector<double>>& reward() const noexcept { return reward_; }

  /// Nonzero successors of (s, a) with cumulative probabilities, for sampling.
  std::span<const Successor> successors(std::size_t s, std::size_t a) const noexcept {
    const auto k = index(s, a);
    return {successors_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }

  std::uint32_t sample_initial(Rng& rng) const;
  std::uint32_t sample_next(std::size_t s, std::size_t a, Rng& rng) const;

  /// Copy with a different discount factor; the kernel is shared logic, not state.
  MdpModel with_discount(double discount) const;
  MdpModel with_reward(std::vector<double> reward) const;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> transition_;
  std::vector<double> initial_;
  double discount_;
  std::optional<std::vector<double>> reward_;
  std::vector<Successor> successors_;
  std::vector<std::size_t> offsets_;
  std::vector<Successor> initial_cdf_;
};

struct Step {
  std::uint32_t state;
  std::uint32_t action;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Trajectory {
  std::vector<Step> steps;
  std::uint64_t seed_tag = 0;

  std::size_t horizon() const noexcept { return steps.size(); }
};

enum class OccupancyKind { exact_infinite, exact_truncated, sampled };

/// Unnormalized discounted state-action occupancy, indexed by MdpModel::index.
struct OccupancyVector {
  Vector entries;
  OccupancyKind kind = OccupancyKind::sampled;
  std::size_t horizon = 0;  // meaningful for exact_truncated and sampled

  double l1_norm() const { return entries.lpNorm<1>(); }
  /// State marginal sum_a lambda(s, a).
  Vector state_marginal(std::size_t num_actions) const;
};

/// Per-state action distributions, num_states x num_actions.
using PolicyMatrix = RowMatrix;

struct InfiniteHorizon {};
struct TruncatedHorizon {
  std::size_t horizon;
};
using OccupancyMode = std::variant<InfiniteHorizon, TruncatedHorizon>;

/// Throws std::invalid_argument unless every row is a distribution of the right width.
void validate_policy(const MdpModel& model, const PolicyMatrix& policy);

PolicyMatrix uniform_policy(const MdpModel& model);

/// s0 ~ initial, a_t ~ policy(s_t), s_{t+1} ~ P(s_t, a_t); exactly horizon steps.
Trajectory sample_trajectory(const MdpModel& model, const PolicyMatrix& policy,
                             std::size_t horizon, Rng& rng);

/// Discounted occupancy of a stationary policy. Infinite mode solves the
/// state flow equations directly for models with at most 4096 state-action
/// pairs and sums the series to a tail below 1e-12 otherwise.
OccupancyVector exact_occupancy(const MdpModel& model, const PolicyMatrix& policy,
                                OccupancyMode mode);

/// Expected one-step reward under the policy, per state.
Vector policy_reward(const MdpModel& model, const PolicyMatrix& policy,
                     std::span<const double> reward);

/// Exact V^pi by a linear solve of (I - gamma P_pi) V = r_pi.
Vector evaluate_policy(const MdpModel& model, const PolicyMatrix& policy,
                       std::span<const double> reward);

struct ValueIterationResult {
  Vector values;
  double optimal_value = 0.0;  // <initial_dist, V*>
  PolicyMatrix greedy_policy;  // deterministic, first maximizer on ties
  std::size_t iterations = 0;
};

/// Bellman optimality iteration, stopped once the sup-norm change drops
/// below tol * (1 - gamma) / gamma.
ValueIterationResult value_iteration(const MdpModel& model, std::span<const double> reward,
                                     double tol = 1e-10);

/// Text format, one directive per line, '#' starts a comment:
///
///   states 3
///   actions 2
///   discount 0.9
///   initial 1 0 0
///   0 1 -> 1:0.8 0:0.2        (s, a) -> next:probability ...
///   reward 0 1 0.5            optional, unlisted pairs are 0
///
/// Every (s, a) row must appear exactly once.
MdpModel parse_mdp(std::istream& in);
MdpModel load_mdp(const std::string& path);
void write_mdp(std::ostream& out, const MdpModel& model);

}  // namespace tsivr
