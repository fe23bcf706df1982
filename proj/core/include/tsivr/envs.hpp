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

#include <string>
#include <string_view>
#include <vector>

namespace tsivr {

enum class Cell { start, frozen, hole, goal };

/// Grid layout in the FrozenLake letter convention: S start, F frozen, H hole, G goal.
/// Actions are 0 left, 1 down, 2 right, 3 up. On a slippery grid the agent moves
/// in the chosen direction or one of its two perpendiculars, each with
/// probability 1/3; moves into a wall leave it in place. Reward 1 is paid on
/// entering a goal cell, and holes and goals are zero-reward self-loops.
struct GridWorldSpec {
  std::vector<std::string> layout;
  bool slippery = true;

  std::size_t rows() const noexcept { return layout.size(); }
  std::size_t cols() const noexcept { return layout.empty() ? 0 : layout.front().size(); }
  Cell cell(std::size_t r, std::size_t c) const;
};

/// The standard 8x8 FrozenLake map, one row per string.
inline const std::vector<std::string> kFrozenLake8x8Map = {
    "SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF",
    "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG",
};
inline const std::vector<std::string> kFrozenLake4x4Map = {"SFFF", "FHFH", "FFFH", "HFFG"};

/// Throws std::invalid_argument for ragged layouts, unknown letters, or a
/// start/goal count other than one start and at least one goal.
MdpModel build_gridworld(const GridWorldSpec& spec, double discount);

MdpModel build_frozenlake8x8(double discount = 0.99);

enum class TinyKind { single_state, two_state_switch, three_state_chain };

/// Oracle-scale models:
///  - single_state: one state, one action, reward 1.
///  - two_state_switch: action 0 stays, action 1 flips the state; starts in
///    state 0; reward 1 for any action taken in state 1.
///  - three_state_chain: action 0 moves left (clamped), action 1 moves right
///    with probability 0.8 and stays with 0.2 (clamped at the end); starts in
///    state 0; reward 1 for any action taken in state 2.
MdpModel build_tiny(TinyKind kind, double discount = 0.5);

/// Built-in environment by name: frozenlake8x8, frozenlake4x4, corridor5,
/// single_state, two_state_switch, three_state_chain. Anything else is
/// treated as a path to an MDP file whose discount is replaced by \p discount.
MdpModel make_environment(const std::string& name_or_path, double discount);

std::vector<std::string> builtin_environment_names();

}  // namespace tsivr
