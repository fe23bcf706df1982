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
#include <tsivr/envs.hpp>
#include <tsivr/mdp.hpp>
#include <tsivr/types.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"

namespace tsivr {
namespace {

using testing::series_occupancy;

PolicyMatrix always(std::size_t S, std::size_t A, std::size_t action) {
  PolicyMatrix pi = PolicyMatrix::Zero(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
  pi.col(static_cast<Eigen::Index>(action)).setOnes();
  return pi;
}

PolicyMatrix random_policy(Rng& rng, std::size_t S, std::size_t A) {
  PolicyMatrix pi(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
  for (Eigen::Index s = 0; s < pi.rows(); ++s) {
    for (Eigen::Index a = 0; a < pi.cols(); ++a) pi(s, a) = 0.05 + uniform01(rng);
    pi.row(s) /= pi.row(s).sum();
  }
  return pi;
}

TEST(MdpModel, RejectsBadRows) {
  EXPECT_THROW(MdpModel(1, 1, {0.5}, {1.0}, 0.5), std::invalid_argument);
  EXPECT_THROW(MdpModel(1, 1, {1.0}, {0.9}, 0.5), std::invalid_argument);
  EXPECT_THROW(MdpModel(2, 1, {1.5, -0.5, 0.0, 1.0}, {1.0, 0.0}, 0.5), std::invalid_argument);
  EXPECT_THROW(MdpModel(1, 1, {1.0}, {1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(MdpModel(1, 1, {1.0}, {1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(MdpModel(1, 1, {1.0}, {1.0}, 0.5, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  EXPECT_NO_THROW(MdpModel(1, 1, {1.0 + 5e-13}, {1.0}, 0.5));
}

TEST(Sampling, SingleStateTrajectory) {
  const auto model = build_tiny(TinyKind::single_state);
  Rng rng(1);
  const auto tau = sample_trajectory(model, uniform_policy(model), 3, rng);
  const std::vector<Step> expect = {{0, 0}, {0, 0}, {0, 0}};
  EXPECT_EQ(tau.steps, expect);
}

TEST(Sampling, SwitchAlwaysFlip) {
  const auto model = build_tiny(TinyKind::two_state_switch);
  Rng rng(7);
  const auto tau = sample_trajectory(model, always(2, 2, 1), 4, rng);
  const std::vector<Step> expect = {{0, 1}, {1, 1}, {0, 1}, {1, 1}};
  EXPECT_EQ(tau.steps, expect);
}

TEST(Sampling, FixedSeedIsReproducible) {
  const auto model = build_frozenlake8x8();
  const auto pi = uniform_policy(model);
  Rng a(12345), b(12345);
  const auto t1 = sample_trajectory(model, pi, 200, a);
  const auto t2 = sample_trajectory(model, pi, 200, b);
  EXPECT_EQ(t1.steps, t2.steps);
  EXPECT_EQ(t1.horizon(), 200u);
}

TEST(Sampling, IndicesInRangeAndFullLength) {
  const auto model = build_frozenlake8x8();
  const auto pi = uniform_policy(model);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto tau = sample_trajectory(model, pi, 137, rng);
    ASSERT_EQ(tau.steps.size(), 137u);
    for (const auto& st : tau.steps) {
      EXPECT_LT(st.state, 64u);
      EXPECT_LT(st.action, 4u);
    }
  }
}

TEST(Sampling, RejectsBadInputs) {
  const auto model = build_tiny(TinyKind::two_state_switch);
  Rng rng(0);
  EXPECT_THROW(sample_trajectory(model, uniform_policy(model), 0, rng), std::invalid_argument);
  PolicyMatrix bad = PolicyMatrix::Constant(3, 2, 0.5);
  EXPECT_THROW(sample_trajectory(model, bad, 3, rng), std::invalid_argument);
}

TEST(Sampling, EmpiricalFrequenciesMatchKernel) {
  const auto model = build_tiny(TinyKind::three_state_chain);
  Rng rng(99);
  const auto pi = always(3, 2, 1);
  int moved = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k)
    if (model.sample_next(0, 1, rng) == 1) ++moved;
  EXPECT_NEAR(static_cast<double>(moved) / n, 0.8, 5.0 * std::sqrt(0.16 / n));
  (void)pi;
}

TEST(ExactOccupancy, SingleStateInfinite) {
  const auto model = build_tiny(TinyKind::single_state, 0.5);
  const auto occ = exact_occupancy(model, uniform_policy(model), InfiniteHorizon{});
  EXPECT_EQ(occ.kind, OccupancyKind::exact_infinite);
  EXPECT_NEAR(occ.entries[0], 2.0, 1e-14);
}

TEST(ExactOccupancy, SingleStateTruncated) {
  const auto model = build_tiny(TinyKind::single_state, 0.5);
  const auto occ = exact_occupancy(model, uniform_policy(model), TruncatedHorizon{2});
  EXPECT_EQ(occ.kind, OccupancyKind::exact_truncated);
  EXPECT_EQ(occ.horizon, 2u);
  EXPECT_NEAR(occ.entries[0], 1.5, 1e-15);
}

TEST(ExactOccupancy, SwitchMatchesSeries) {
  const auto model = build_tiny(TinyKind::two_state_switch, 0.5);
  const auto pi = uniform_policy(model);
  const auto occ = exact_occupancy(model, pi, InfiniteHorizon{});
  // tail of 30 terms at gamma = 0.5 is 2^-29 < 2e-9; 60 terms is below 1e-17
  const Vector series = series_occupancy(model, pi, 60);
  EXPECT_LT((occ.entries - series).cwiseAbs().maxCoeff(), 1e-12);
  const Vector short_series = series_occupancy(model, pi, 30);
  EXPECT_LT((occ.entries - short_series).lpNorm<1>(), std::pow(0.5, 30) / 0.5 + 1e-15);
}

TEST(ExactOccupancy, NormsAndNonnegativity) {
  Rng rng(5);
  for (const auto& name : {"two_state_switch", "three_state_chain", "frozenlake4x4", "frozenlake8x8", "corridor5"}) {
    const auto model = make_environment(name, 0.9);
    for (int k = 0; k < 5; ++k) {
      const auto pi = random_policy(rng, model.num_states(), model.num_actions());
      const auto inf = exact_occupancy(model, pi, InfiniteHorizon{});
      EXPECT_NEAR(inf.l1_norm(), 10.0, 1e-9) << name;
      EXPECT_GE(inf.entries.minCoeff(), 0.0);
      for (std::size_t H : {1u, 7u, 40u}) {
        const auto tr = exact_occupancy(model, pi, TruncatedHorizon{H});
        EXPECT_NEAR(tr.l1_norm(), (1.0 - std::pow(0.9, H)) / 0.1, 1e-9);
        EXPECT_GE(tr.entries.minCoeff(), 0.0);
        EXPECT_LE((inf.entries - tr.entries).lpNorm<1>(), std::pow(0.9, H) / 0.1 + 1e-9);
        EXPECT_LT((tr.entries - series_occupancy(model, pi, H)).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(ExactOccupancy, TruncatedConvergesToInfinite) {
  const auto model = build_frozenlake8x8(0.99);
  const auto pi = uniform_policy(model);
  const auto inf = exact_occupancy(model, pi, InfiniteHorizon{});
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t H : {10u, 100u, 1000u, 5000u}) {
    const double gap = (inf.entries - exact_occupancy(model, pi, TruncatedHorizon{H}).entries).lpNorm<1>();
    EXPECT_LE(gap, std::pow(0.99, H) / 0.01 + 1e-9);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-11);  // the tail bound is 1.5e-20; what remains is solver roundoff
}

TEST(ExactOccupancy, DotRewardEqualsPolicyValue) {
  Rng rng(8);
  const auto model = build_frozenlake8x8(0.95);
  const auto r = testing::reward_of(model);
  for (int k = 0; k < 5; ++k) {
    const auto pi = random_policy(rng, 64, 4);
    const auto occ = exact_occupancy(model, pi, InfiniteHorizon{});
    const Vector rv = Eigen::Map<const Vector>(r.data(), static_cast<Eigen::Index>(r.size()));
    const auto v = testing::iterative_policy_values(model, pi, r);
    double value = 0.0;
    for (std::size_t s = 0; s < 64; ++s) value += model.initial_dist()[s] * v[static_cast<Eigen::Index>(s)];
    EXPECT_NEAR(occ.entries.dot(rv), value, 1e-8);
    const auto ev = evaluate_policy(model, pi, r);
    EXPECT_LT((ev - v).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ValueIteration, SingleState) {
  const auto model = build_tiny(TinyKind::single_state, 0.5);
  const std::vector<double> r = {1.0};
  EXPECT_NEAR(value_iteration(model, r).optimal_value, 2.0, 1e-9);
}

TEST(ValueIteration, SwitchMatchesPolicyEnumeration) {
  for (double gamma : {0.5, 0.9, 0.99}) {
    const auto model = build_tiny(TinyKind::two_state_switch, gamma);
    const auto r = testing::reward_of(model);
    const auto vi = value_iteration(model, r, 1e-12);
    EXPECT_NEAR(vi.optimal_value, testing::best_deterministic_value(model, r), 1e-9) << gamma;
  }
}

TEST(ValueIteration, ChainAndCorridorMatchPolicyEnumeration) {
  for (const auto& name : {"three_state_chain", "corridor5"}) {
    const auto model = make_environment(name, 0.9);
    const auto r = testing::reward_of(model);
    EXPECT_NEAR(value_iteration(model, r, 1e-12).optimal_value, testing::best_deterministic_value(model, r), 1e-9)
        << name;
  }
}

TEST(ValueIteration, FrozenLakeAnchor) {
  const auto model = build_frozenlake8x8(0.99);
  const auto r = testing::reward_of(model);
  const auto vi = value_iteration(model, r);
  EXPECT_NEAR(vi.optimal_value, 0.4146, 1e-3);
  // the greedy policy attains the optimum
  const auto v = evaluate_policy(model, vi.greedy_policy, r);
  EXPECT_NEAR(v[0], vi.optimal_value, 1e-7);
}

TEST(ValueIteration, RejectsBadInputs) {
  const auto model = build_tiny(TinyKind::single_state);
  EXPECT_THROW(value_iteration(model, std::vector<double>{1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(value_iteration(model, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  const double nan = std::nan("");
  EXPECT_THROW(value_iteration(model, std::vector<double>{nan}), std::invalid_argument);
}

TEST(MdpFile, RoundTrip) {
  const auto model = build_tiny(TinyKind::three_state_chain, 0.75);
  std::stringstream buf;
  write_mdp(buf, model);
  const auto back = parse_mdp(buf);
  ASSERT_EQ(back.num_states(), 3u);
  ASSERT_EQ(back.num_actions(), 2u);
  EXPECT_EQ(back.discount(), 0.75);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t n = 0; n < 3; ++n) EXPECT_EQ(back.transition(s, a, n), model.transition(s, a, n));
  EXPECT_EQ(*back.reward(), *model.reward());
}

TEST(MdpFile, ParsesCommentsAndSparseReward) {
  std::istringstream in(
      "# two states\n"
      "states 2\nactions 1\ndiscount 0.9\n"
      "initial 1 0\n"
      "0 0 -> 1:1   # move\n"
      "1 0 -> 1:0.5 0:0.5\n"
      "reward 1 0 2.5\n");
  const auto m = parse_mdp(in);
  EXPECT_EQ(m.transition(1, 0, 0), 0.5);
  EXPECT_EQ((*m.reward())[0], 0.0);
  EXPECT_EQ((*m.reward())[1], 2.5);
}

TEST(MdpFile, ErrorsCarryLineNumbers) {
  std::istringstream missing("states 2\nactions 1\ndiscount 0.9\ninitial 1 0\n0 0 -> 1:1\n");
  EXPECT_THROW(parse_mdp(missing), ParseError);
  std::istringstream bad("states 2\nactions 1\ndiscount 0.9\ninitial 1 0\n0 0 -> 1:x\n1 0 -> 0:1\n");
  try {
    parse_mdp(bad);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
  std::istringstream unnormalized("states 1\nactions 1\ndiscount 0.9\ninitial 1\n0 0 -> 0:0.5\n");
  EXPECT_ANY_THROW(parse_mdp(unnormalized));
}

}  // namespace
}  // namespace tsivr
