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

#include <filesystem>

namespace tsivr {

Cell GridWorldSpec::cell(std::size_t r, std::size_t c) const {
  switch (layout.at(r).at(c)) {
    case 'S': return Cell::start;
    case 'F': return Cell::frozen;
    case 'H': return Cell::hole;
    case 'G': return Cell::goal;
    default: throw std::invalid_argument(std::string("gridworld: unknown cell '") + layout[r][c] + "'");
  }
}

MdpModel build_gridworld(const GridWorldSpec& spec, double discount) {
  const auto R = spec.rows();
  const auto C = spec.cols();
  if (R == 0 || C == 0) throw std::invalid_argument("gridworld: empty layout");
  std::size_t starts = 0, goals = 0, start_state = 0;
  for (std::size_t r = 0; r < R; ++r) {
    if (spec.layout[r].size() != C) throw std::invalid_argument("gridworld: ragged layout");
    for (std::size_t c = 0; c < C; ++c) {
      const auto k = spec.cell(r, c);
      if (k == Cell::start) {
        ++starts;
        start_state = r * C + c;
      }
      if (k == Cell::goal) ++goals;
    }
  }
  if (starts != 1) throw std::invalid_argument("gridworld: exactly one start cell required");
  if (goals == 0) throw std::invalid_argument("gridworld: at least one goal cell required");

  constexpr std::size_t A = 4;
  const std::size_t S = R * C;
  std::vector<double> P(S * A * S, 0.0);
  std::vector<double> reward(S * A, 0.0);
  auto move = [&](std::size_t r, std::size_t c, std::size_t dir) {
    switch (dir) {
      case 0: c = c > 0 ? c - 1 : c; break;
      case 1: r = r + 1 < R ? r + 1 : r; break;
      case 2: c = c + 1 < C ? c + 1 : c; break;
      default: r = r > 0 ? r - 1 : r; break;
    }
    return r * C + c;
  };
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      const auto s = r * C + c;
      const auto kind = spec.cell(r, c);
      for (std::size_t a = 0; a < A; ++a) {
        double* row = &P[(s * A + a) * S];
        if (kind == Cell::hole || kind == Cell::goal) {
          row[s] = 1.0;
          continue;
        }
        const std::size_t dirs[3] = {(a + 3) % 4, a, (a + 1) % 4};
        const std::size_t n = spec.slippery ? 3 : 1;
        for (std::size_t k = 0; k < n; ++k) {
          const auto dir = spec.slippery ? dirs[k] : a;
          const auto next = move(r, c, dir);
          const double p = 1.0 / static_cast<double>(n);
          row[next] += p;
          if (spec.cell(next / C, next % C) == Cell::goal) reward[s * A + a] += p;
        }
      }
    }
  }
  std::vector<double> initial(S, 0.0);
  initial[start_state] = 1.0;
  return MdpModel(S, A, std::move(P), std::move(initial), discount, std::move(reward));
}

MdpModel build_frozenlake8x8(double discount) { return build_gridworld({kFrozenLake8x8Map, true}, discount); }

MdpModel build_tiny(TinyKind kind, double discount) {
  switch (kind) {
    case TinyKind::single_state:
      return MdpModel(1, 1, {1.0}, {1.0}, discount, std::vector<double>{1.0});
    case TinyKind::two_state_switch: {
      // rows (s, a): (0,0) stay, (0,1) flip, (1,0) stay, (1,1) flip
      std::vector<double> P = {1, 0, 0, 1, 0, 1, 1, 0};
      return MdpModel(2, 2, std::move(P), {1.0, 0.0}, discount, std::vector<double>{0, 0, 1, 1});
    }
    case TinyKind::three_state_chain: {
      constexpr std::size_t S = 3, A = 2;
      std::vector<double> P(S * A * S, 0.0);
      for (std::size_t s = 0; s < S; ++s) {
        P[(s * A + 0) * S + (s > 0 ? s - 1 : 0)] += 1.0;
        const auto right = s + 1 < S ? s + 1 : s;
        P[(s * A + 1) * S + right] += 0.8;
        P[(s * A + 1) * S + s] += 0.2;
      }
      return MdpModel(S, A, std::move(P), {1.0, 0.0, 0.0}, discount, std::vector<double>{0, 0, 0, 0, 1, 1});
    }
  }
  throw std::invalid_argument("build_tiny: unknown kind");
}

std::vector<std::string> builtin_environment_names() {
  return {"frozenlake8x8", "frozenlake4x4", "corridor5", "single_state", "two_state_switch", "three_state_chain"};
}

MdpModel make_environment(const std::string& name, double discount) {
  if (name == "frozenlake8x8") return build_frozenlake8x8(discount);
  if (name == "frozenlake4x4") return build_gridworld({kFrozenLake4x4Map, true}, discount);
  if (name == "corridor5") return build_gridworld({{"SFFFG"}, true}, discount);
  if (name == "single_state") return build_tiny(TinyKind::single_state, discount);
  if (name == "two_state_switch") return build_tiny(TinyKind::two_state_switch, discount);
  if (name == "three_state_chain") return build_tiny(TinyKind::three_state_chain, discount);
  if (std::filesystem::exists(name)) return load_mdp(name).with_discount(discount);
  throw std::invalid_argument("unknown environment '" + name + "' (not a built-in name or an existing file)");
}

}  // namespace tsivr
