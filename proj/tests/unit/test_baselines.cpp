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
#include <tsivr/envs.hpp>

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

namespace tsivr {
namespace {

using testing::direct_policy;
using testing::random_normal;

Vector reward_vector(const MdpModel& model) {
  return Eigen::Map<const Vector>(model.reward()->data(), static_cast<Eigen::Index>(model.num_pairs()));
}

TEST(Reinforce, LinearUtilityUsesFixedReward) {
  const auto model = build_frozenlake8x8();
  TabularFeatures fm(64, 4);
  const auto u = linear_utility(reward_vector(model));
  BaselineConfig cfg;
  cfg.N = 10;
  cfg.seed = 1;
  Rng rng(1);
  const PolicyParams theta(random_normal(rng, 256, 0.3));
  for (std::size_t it = 0; it < 3; ++it) {
    const auto step = reinforce_step({model, fm, *u}, theta, cfg, it);
    EXPECT_EQ(step.estimate.quasi_reward, reward_vector(model));
    EXPECT_EQ(step.theta.theta, theta.theta + cfg.eta * step.estimate.grad);
    EXPECT_EQ(step.episodes.size(), cfg.N);
  }
}

TEST(Reinforce, SingleActionLeavesThetaUnchanged) {
  const auto model = build_tiny(TinyKind::single_state);
  TabularFeatures fm(1, 1);
  const auto u = log_barrier_utility(1, 1);
  BaselineConfig cfg;
  cfg.gamma = 0.5;
  cfg.H = 5;
  const PolicyParams theta(Vector::Constant(1, 0.7));
  const auto step = reinforce_step({model, fm, *u}, theta, cfg, 0);
  EXPECT_EQ(step.estimate.grad.norm(), 0.0);
  EXPECT_EQ(step.theta.theta, theta.theta);
}

TEST(Reinforce, ExactBatchGivesExactGradient) {
  Rng rng(2);
  for (const auto kind : {TinyKind::two_state_switch, TinyKind::three_state_chain}) {
    const auto model = build_tiny(kind, 0.75);
    TabularFeatures fm(model.num_states(), model.num_actions());
    const auto u = linear_utility(reward_vector(model));
    for (int k = 0; k < 5; ++k) {
      const PolicyParams theta(random_normal(rng, fm.dim()));
      std::vector<Trajectory> taus;
      std::vector<double> probs;
      for (auto& p : testing::all_paths(model, direct_policy(fm, theta), 4)) {
        taus.push_back(std::move(p.trajectory));
        probs.push_back(p.probability);
      }
      const auto est = reinforce_estimate({model, fm, *u}, theta, {taus, probs}, 0.75);
      const Vector exact = testing::occupancy_jacobian(model, fm, theta, 4).transpose() * reward_vector(model);
      EXPECT_LT((est.grad - exact).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Reinforce, RunIsDeterministicAndCountsEpisodes) {
  const auto model = build_frozenlake8x8();
  TabularFeatures fm(64, 4);
  const auto u = log_barrier_utility(64, 4);
  BaselineConfig cfg;
  cfg.N = 8;
  cfg.H = 40;
  cfg.iterations = 5;
  cfg.seed = 3;
  const auto a = run_reinforce(model, fm, *u, cfg, PolicyParams::zeros(256));
  const auto b = run_reinforce(model, fm, *u, cfg, PolicyParams::zeros(256));
  std::ostringstream ca, cb;
  a.trace.write_csv(ca);
  b.trace.write_csv(cb);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(a.trace.episodes.size(), 40u);
  EXPECT_EQ(a.trace.iterations.back().samples, 40u * 40u);
}

TEST(Reinforce, ConfigValidation) {
  BaselineConfig cfg;
  cfg.N = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.N = 1;
  cfg.eta = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace tsivr
