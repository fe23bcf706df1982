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
#include <tsivr/mdp.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tsivr {
namespace {

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

template <typename T>
T read_value(std::istringstream& is, std::size_t line, const char* what) {
  T v{};
  if (!(is >> v)) throw ParseError(std::string("expected ") + what, line);
  return v;
}

void expect_end(std::istringstream& is, std::size_t line) {
  std::string rest;
  if (is >> rest) throw ParseError("unexpected trailing token '" + rest + "'", line);
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MdpModel parse_mdp(std::istream& in) {
  std::size_t S = 0, A = 0;
  double discount = -1.0;
  std::vector<double> initial;
  std::vector<double> transition;
  std::vector<char> seen;
  std::vector<double> reward;
  bool has_reward = false;
  std::size_t initial_line = 0;

  auto require_sizes = [&](std::size_t line) {
    if (S == 0 || A == 0) throw ParseError("'states' and 'actions' must precede this directive", line);
    if (transition.empty()) {
      transition.assign(S * A * S, 0.0);
      seen.assign(S * A, 0);
      reward.assign(S * A, 0.0);
    }
  };

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = strip_comment(raw);
    std::istringstream is(line);
    std::string head;
    if (!(is >> head)) continue;

    if (head == "states" || head == "actions") {
      if (!transition.empty()) throw ParseError("sizes must be declared before transitions", lineno);
      const auto n = read_value<long long>(is, lineno, "a positive count");
      if (n <= 0) throw ParseError(head + " must be positive", lineno);
      (head == "states" ? S : A) = static_cast<std::size_t>(n);
      expect_end(is, lineno);
    } else if (head == "discount") {
      discount = read_value<double>(is, lineno, "a discount factor");
      expect_end(is, lineno);
    } else if (head == "initial") {
      if (S == 0) throw ParseError("'states' must precede 'initial'", lineno);
      initial.clear();
      double p;
      while (is >> p) initial.push_back(p);
      if (!is.eof()) throw ParseError("malformed initial distribution", lineno);
      if (initial.size() != S) throw ParseError("initial distribution needs one entry per state", lineno);
      initial_line = lineno;
    } else if (head == "reward") {
      require_sizes(lineno);
      const auto s = read_value<std::size_t>(is, lineno, "a state index");
      const auto a = read_value<std::size_t>(is, lineno, "an action index");
      const auto r = read_value<double>(is, lineno, "a reward value");
      expect_end(is, lineno);
      if (s >= S || a >= A) throw ParseError("reward index out of range", lineno);
      reward[s * A + a] = r;
      has_reward = true;
    } else {
      // "s a -> next:p next:p ..."
      require_sizes(lineno);
      std::istringstream row(line);
      const auto s = read_value<long long>(row, lineno, "a state index");
      const auto a = read_value<long long>(row, lineno, "an action index");
      std::string arrow;
      if (!(row >> arrow) || arrow != "->") throw ParseError("expected '->' after (s, a)", lineno);
      if (s < 0 || a < 0 || static_cast<std::size_t>(s) >= S || static_cast<std::size_t>(a) >= A)
        throw ParseError("transition index out of range", lineno);
      const auto k = static_cast<std::size_t>(s) * A + static_cast<std::size_t>(a);
      if (seen[k]) throw ParseError("duplicate transition row", lineno);
      seen[k] = 1;
      std::string tok;
      bool any = false;
      while (row >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw ParseError("expected next:probability, got '" + tok + "'", lineno);
        std::size_t next = 0;
        double p = 0.0;
        try {
          std::size_t used = 0;
          next = std::stoul(tok.substr(0, colon), &used);
          if (used != colon) throw std::invalid_argument("");
          const auto ptxt = tok.substr(colon + 1);
          p = std::stod(ptxt, &used);
          if (used != ptxt.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
          throw ParseError("malformed successor '" + tok + "'", lineno);
        }
        if (next >= S) throw ParseError("successor state out of range", lineno);
        transition[k * S + next] += p;
        any = true;
      }
      if (!any) throw ParseError("transition row has no successors", lineno);
    }
  }

  if (S == 0 || A == 0) throw ParseError("missing 'states' or 'actions'", lineno);
  if (discount < 0.0) throw ParseError("missing 'discount'", lineno);
  if (initial.empty()) throw ParseError("missing 'initial'", lineno);
  if (transition.empty()) throw ParseError("no transition rows", lineno);
  for (std::size_t k = 0; k < S * A; ++k)
    if (!seen[k])
      throw ParseError("missing transition row for (" + std::to_string(k / A) + ", " + std::to_string(k % A) + ")",
                       lineno);
  try {
    return MdpModel(S, A, std::move(transition), std::move(initial), discount,
                    has_reward ? std::optional(std::move(reward)) : std::nullopt);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), initial_line);
  }
}

MdpModel load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open MDP file: " + path);
  return parse_mdp(in);
}

void write_mdp(std::ostream& out, const MdpModel& model) {
  const auto S = model.num_states();
  const auto A = model.num_actions();
  out << "states " << S << "\nactions " << A << "\ndiscount " << fmt17(model.discount()) << "\ninitial";
  for (double p : model.initial_dist()) out << ' ' << fmt17(p);
  out << '\n';
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) {
      out << s << ' ' << a << " ->";
      const auto row = model.transition(s, a);
      for (std::size_t n = 0; n < S; ++n)
        if (row[n] > 0.0) out << ' ' << n << ':' << fmt17(row[n]);
      out << '\n';
    }
  if (const auto& r = model.reward()) {
    for (std::size_t k = 0; k < r->size(); ++k)
      if ((*r)[k] != 0.0) out << "reward " << k / A << ' ' << k % A << ' ' << fmt17((*r)[k]) << '\n';
  }
}

}  // namespace tsivr
