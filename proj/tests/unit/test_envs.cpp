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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

namespace tsivr {
namespace {

TEST(FrozenLake, ShapeAndAbsorbingCells) {
  const auto m = build_frozenlake8x8();
  ASSERT_EQ(m.num_states(), 64u);
  ASSERT_EQ(m.num_actions(), 4u);
  EXPECT_EQ(m.initial_dist()[0], 1.0);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) {
      const char cell = kFrozenLake8x8Map[r][c];
      const std::size_t s = r * 8 + c;
      for (std::size_t a = 0; a < 4; ++a) {
        double total = 0.0;
        for (std::size_t n = 0; n < 64; ++n) total += m.transition(s, a, n);
        EXPECT_NEAR(total, 1.0, 1e-12);
        if (cell == 'H' || cell == 'G') {
          EXPECT_EQ(m.transition(s, a, s), 1.0);
          EXPECT_EQ((*m.reward())[s * 4 + a], 0.0);
        }
      }
    }
}

TEST(FrozenLake, SlipperyRule) {
  const auto m = build_frozenlake8x8();
  // start corner, action right: slips down, goes right, or bumps the top wall
  EXPECT_NEAR(m.transition(0, 2, 8), 1.0 / 3, 1e-15);
  EXPECT_NEAR(m.transition(0, 2, 1), 1.0 / 3, 1e-15);
  EXPECT_NEAR(m.transition(0, 2, 0), 1.0 / 3, 1e-15);
  // action left from the corner: up and left clamp, down moves
  EXPECT_NEAR(m.transition(0, 0, 0), 2.0 / 3, 1e-15);
  EXPECT_NEAR(m.transition(0, 0, 8), 1.0 / 3, 1e-15);
  // next to the goal: reward is the probability of entering it
  EXPECT_NEAR((*m.reward())[62 * 4 + 2], 1.0 / 3, 1e-15);
  EXPECT_NEAR((*m.reward())[55 * 4 + 1], 1.0 / 3, 1e-15);
  EXPECT_EQ((*m.reward())[0], 0.0);
}

TEST(FrozenLake, DeterministicConstruction) {
  const auto a = build_frozenlake8x8(), b = build_frozenlake8x8();
  for (std::size_t s = 0; s < 64; ++s)
    for (std::size_t a2 = 0; a2 < 4; ++a2)
      for (std::size_t n = 0; n < 64; ++n) ASSERT_EQ(a.transition(s, a2, n), b.transition(s, a2, n));
  EXPECT_EQ(*a.reward(), *b.reward());
}

TEST(FrozenLake, ValueAnchor) {
  const auto m = build_frozenlake8x8(0.99);
  EXPECT_NEAR(value_iteration(m, *m.reward()).optimal_value, 0.4146, 1e-3);
}

TEST(Tiny, SingleState) {
  const auto m = build_tiny(TinyKind::single_state);
  EXPECT_EQ(m.num_states(), 1u);
  EXPECT_EQ(m.num_actions(), 1u);
  EXPECT_EQ(m.transition(0, 0, 0), 1.0);
  EXPECT_EQ(m.discount(), 0.5);
}

TEST(Tiny, Switch) {
  const auto m = build_tiny(TinyKind::two_state_switch);
  EXPECT_EQ(m.initial_dist()[0], 1.0);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_EQ(m.transition(s, 0, s), 1.0);
    EXPECT_EQ(m.transition(s, 1, 1 - s), 1.0);
  }
}

TEST(Tiny, ChainAlwaysRightMatchesClosedForm) {
  const auto m = build_tiny(TinyKind::three_state_chain, 0.5);
  PolicyMatrix right = PolicyMatrix::Zero(3, 2);
  right.col(1).setOnes();
  const auto occ = exact_occupancy(m, right, InfiniteHorizon{});
  // d_t(0) = 0.2^t and d_t(1) = 0.8 t 0.2^(t-1), discounted by 0.5^t
  const double l0 = 1.0 / (1.0 - 0.1);
  const double l1 = 0.8 * 0.5 / ((1.0 - 0.1) * (1.0 - 0.1));
  EXPECT_NEAR(occ.entries[1], l0, 1e-13);
  EXPECT_NEAR(occ.entries[3], l1, 1e-13);
  EXPECT_NEAR(occ.entries[5], 2.0 - l0 - l1, 1e-13);
  EXPECT_EQ(occ.entries[0], 0.0);
}

TEST(Tiny, EnumerableAtTestHorizons) {
  for (const auto kind : {TinyKind::single_state, TinyKind::two_state_switch, TinyKind::three_state_chain}) {
    const auto m = build_tiny(kind);
    const std::size_t H = kind == TinyKind::three_state_chain ? 4 : 6;
    EXPECT_LE(std::pow(static_cast<double>(m.num_pairs()), static_cast<double>(H)), 5000.0);
  }
}

TEST(Gridworld, RejectsBadLayouts) {
  EXPECT_THROW(build_gridworld({{"FFF", "FFG"}}, 0.9), std::invalid_argument);
  EXPECT_THROW(build_gridworld({{"SSF", "FFG"}}, 0.9), std::invalid_argument);
  EXPECT_THROW(build_gridworld({{"SFF", "FFF"}}, 0.9), std::invalid_argument);
  EXPECT_THROW(build_gridworld({{"SFF", "FG"}}, 0.9), std::invalid_argument);
  EXPECT_THROW(build_gridworld({{"SXF", "FFG"}}, 0.9), std::invalid_argument);
  EXPECT_THROW(build_gridworld({{}}, 0.9), std::invalid_argument);
}

TEST(Gridworld, NonSlipperyIsDeterministic) {
  const auto m = build_gridworld({{"SFG"}, false}, 0.9);
  EXPECT_EQ(m.transition(0, 2, 1), 1.0);
  EXPECT_EQ(m.transition(1, 0, 0), 1.0);
  EXPECT_EQ((*m.reward())[1 * 4 + 2], 1.0);
}

TEST(Environments, ByName) {
  for (const auto& name : builtin_environment_names()) EXPECT_NO_THROW(make_environment(name, 0.9)) << name;
  EXPECT_EQ(make_environment("frozenlake8x8", 0.95).discount(), 0.95);
  EXPECT_ANY_THROW(make_environment("/nonexistent/model.mdp", 0.9));
}

}  // namespace
}  // namespace tsivr
