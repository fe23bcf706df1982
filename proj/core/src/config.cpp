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

#include <tsivr/config.hpp>
#include <tsivr/policy.hpp>

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tsivr {

std::string to_string(Algorithm a) { return a == Algorithm::tsivr_pg ? "tsivr_pg" : "reinforce"; }

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "tsivr_pg") return Algorithm::tsivr_pg;
  if (name == "reinforce") return Algorithm::reinforce;
  throw ConfigError("algorithm", "unknown algorithm '" + name + "' (expected tsivr_pg or reinforce)");
}

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw ConfigError(path, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "cannot parse '" + node.Scalar() + "'");
  }
}

template <typename T>
void read(const YAML::Node& parent, const std::string& prefix, const char* key, T& out) {
  if (const auto node = parent[key]) out = scalar<T>(node, join(prefix, key));
}

std::size_t read_count(const YAML::Node& node, const std::string& path) {
  const auto v = scalar<long long>(node, path);
  if (v < 0) throw ConfigError(path, "must be nonnegative");
  return static_cast<std::size_t>(v);
}

void read_size(const YAML::Node& parent, const std::string& prefix, const char* key, std::size_t& out) {
  if (const auto node = parent[key]) out = read_count(node, join(prefix, key));
}

Vector read_vector(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) throw ConfigError(path, "expected a list of numbers");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = scalar<double>(node[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Matrix read_matrix(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence() || node.size() == 0) throw ConfigError(path, "expected a nonempty list of rows");
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < node.size(); ++i) {
    rows.push_back(read_vector(node[i], path + "[" + std::to_string(i) + "]"));
    if (rows.back().size() != rows.front().size()) throw ConfigError(path, "ragged matrix");
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

// Rethrows an AlgoConfig/BaselineConfig "field: why" message under a section path.
[[noreturn]] void rethrow_section(const std::invalid_argument& e, const std::string& section) {
  const std::string msg = e.what();
  const auto colon = msg.find(": ");
  if (colon == std::string::npos) throw ConfigError(section, msg);
  throw ConfigError(section + "." + msg.substr(0, colon), msg.substr(colon + 2));
}

void parse_utility(const YAML::Node& node, UtilitySpec& u) {
  const std::string p = "utility";
  check_keys(node, p, {"kind", "reward", "sigma", "floor", "feedback", "set"});
  read(node, p, "kind", u.kind);
  read(node, p, "sigma", u.sigma);
  read(node, p, "floor", u.floor);
  if (const auto r = node["reward"]) u.reward = read_vector(r, "utility.reward");
  if (const auto f = node["feedback"]) u.feedback = read_matrix(f, "utility.feedback");
  if (const auto s = node["set"]) {
    const std::string sp = "utility.set";
    check_keys(s, sp, {"kind", "center", "radius", "lower", "upper"});
    std::string kind = "ball";
    read(s, sp, "kind", kind);
    if (kind == "ball") {
      BallSet ball;
      if (!s["center"]) throw ConfigError(sp + ".center", "required for a ball");
      ball.center = read_vector(s["center"], sp + ".center");
      read(s, sp, "radius", ball.radius);
      u.set = ball;
    } else if (kind == "box") {
      if (!s["lower"] || !s["upper"]) throw ConfigError(sp, "box needs lower and upper");
      u.set = BoxSet{read_vector(s["lower"], sp + ".lower"), read_vector(s["upper"], sp + ".upper")};
    } else {
      throw ConfigError(sp + ".kind", "expected ball or box");
    }
  }
}

void parse_tsivr(const YAML::Node& node, AlgoConfig& a) {
  const std::string p = "tsivr_pg";
  check_keys(node, p, {"N", "B", "m", "H", "eta", "delta", "epochs", "truncation", "threads", "weight_guard",
                       "checkpoint_dir"});
  read_size(node, p, "N", a.N);
  read_size(node, p, "B", a.B);
  read_size(node, p, "m", a.m);
  read_size(node, p, "H", a.H);
  read(node, p, "eta", a.eta);
  read(node, p, "delta", a.delta);
  read_size(node, p, "epochs", a.T);
  read(node, p, "truncation", a.truncation_enabled);
  read_size(node, p, "threads", a.threads);
  read(node, p, "weight_guard", a.weight_guard);
  read(node, p, "checkpoint_dir", a.checkpoint_dir);
}

void parse_reinforce(const YAML::Node& node, BaselineConfig& b) {
  const std::string p = "reinforce";
  check_keys(node, p, {"N", "H", "eta", "iterations", "threads"});
  read_size(node, p, "N", b.N);
  read_size(node, p, "H", b.H);
  read(node, p, "eta", b.eta);
  read_size(node, p, "iterations", b.iterations);
  read_size(node, p, "threads", b.threads);
}

void parse_slope(const YAML::Node& node, SlopeSpec& s) {
  const std::string p = "slope";
  check_keys(node, p, {"N", "epsilons", "epochs", "final_window"});
  if (const auto n = node["N"]) {
    if (!n.IsSequence()) throw ConfigError("slope.N", "expected a list");
    for (std::size_t i = 0; i < n.size(); ++i)
      s.N_values.push_back(read_count(n[i], "slope.N[" + std::to_string(i) + "]"));
  }
  if (const auto e = node["epsilons"]) {
    if (!e.IsSequence()) throw ConfigError("slope.epsilons", "expected a list");
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string ep = "slope.epsilons[" + std::to_string(i) + "]";
      const double eps = scalar<double>(e[i], ep);
      if (!(eps > 0.0 && eps < 1.0)) throw ConfigError(ep, "must lie in (0, 1)");
      s.N_values.push_back(static_cast<std::size_t>(std::ceil(1.0 / (eps * eps) - 1e-9)));
    }
  }
  read_size(node, p, "epochs", s.epochs);
  read_size(node, p, "final_window", s.final_window);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (environment.empty()) throw ConfigError("environment", "must not be empty");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma", "must lie in (0, 1)");
  if (feature_map != "tabular") throw ConfigError("feature_map", "only tabular is supported by the runner");
  if (num_runs == 0) throw ConfigError("runs", "must be >= 1");
  if (smoothing_window == 0) throw ConfigError("smoothing_window", "must be >= 1");
  if (curve_interval == 0) throw ConfigError("curve_interval", "must be >= 1");
  if (parallel_runs == 0) throw ConfigError("parallel_runs", "must be >= 1");
  if (output_dir.empty()) throw ConfigError("output", "must not be empty");
  if (init.kind != "zero" && init.kind != "normal") throw ConfigError("init.kind", "expected zero or normal");
  if (!(init.scale >= 0.0) || !std::isfinite(init.scale)) throw ConfigError("init.scale", "must be >= 0");

  static const std::set<std::string> kinds = {"linear", "entropy", "log_barrier", "set_distance"};
  if (!kinds.count(utility.kind)) throw ConfigError("utility.kind", "unknown utility '" + utility.kind + "'");
  if (utility.kind == "log_barrier" && !(utility.sigma > 0.0)) throw ConfigError("utility.sigma", "must be > 0");
  if (utility.kind == "entropy" && !(utility.floor > 0.0)) throw ConfigError("utility.floor", "must be > 0");
  if (utility.kind == "set_distance" && utility.feedback.size() == 0)
    throw ConfigError("utility.feedback", "required for set_distance");

  try {
    tsivr.validate();
  } catch (const std::invalid_argument& e) {
    rethrow_section(e, "tsivr_pg");
  }
  try {
    reinforce.validate();
  } catch (const std::invalid_argument& e) {
    rethrow_section(e, "reinforce");
  }

  if (experiment == ExperimentKind::slope) {
    if (algorithm != Algorithm::tsivr_pg) throw ConfigError("algorithm", "slope study runs tsivr_pg");
    if (utility.kind != "linear") throw ConfigError("utility.kind", "slope study needs a linear utility");
    if (slope.N_values.size() < 2) throw ConfigError("slope.N", "needs at least two values");
    for (std::size_t i = 0; i < slope.N_values.size(); ++i)
      if (slope.N_values[i] == 0) throw ConfigError("slope.N[" + std::to_string(i) + "]", "must be >= 1");
    if (slope.epochs == 0) throw ConfigError("slope.epochs", "must be >= 1");
    if (slope.final_window == 0) throw ConfigError("slope.final_window", "must be >= 1");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<root>", std::string("malformed config: ") + e.what());
  }
  ExperimentConfig cfg;
  if (root.IsNull()) throw ConfigError("<root>", "empty config");
  check_keys(root, "",
             {"experiment", "environment", "gamma", "feature_map", "algorithm", "utility", "tsivr_pg", "reinforce",
              "init", "slope", "runs", "seed", "output", "smoothing_window", "curve_interval", "return",
              "exact_eval_every", "exact_eval_horizon", "parallel_runs"});

  std::string experiment = "curve";
  read(root, "", "experiment", experiment);
  if (experiment == "curve") cfg.experiment = ExperimentKind::curve;
  else if (experiment == "slope") cfg.experiment = ExperimentKind::slope;
  else if (experiment == "nonlinear") cfg.experiment = ExperimentKind::nonlinear;
  else throw ConfigError("experiment", "expected curve, slope or nonlinear");

  read(root, "", "environment", cfg.environment);
  read(root, "", "gamma", cfg.gamma);
  read(root, "", "feature_map", cfg.feature_map);
  if (const auto a = root["algorithm"]) cfg.algorithm = algorithm_from_string(scalar<std::string>(a, "algorithm"));
  if (const auto u = root["utility"]) parse_utility(u, cfg.utility);
  if (const auto t = root["tsivr_pg"]) parse_tsivr(t, cfg.tsivr);
  if (const auto r = root["reinforce"]) parse_reinforce(r, cfg.reinforce);
  if (const auto i = root["init"]) {
    check_keys(i, "init", {"kind", "scale"});
    read(i, "init", "kind", cfg.init.kind);
    read(i, "init", "scale", cfg.init.scale);
  }
  if (const auto s = root["slope"]) parse_slope(s, cfg.slope);
  read_size(root, "", "runs", cfg.num_runs);
  if (const auto s = root["seed"]) cfg.seed_base = scalar<std::uint64_t>(s, "seed");
  read(root, "", "output", cfg.output_dir);
  read_size(root, "", "smoothing_window", cfg.smoothing_window);
  read_size(root, "", "curve_interval", cfg.curve_interval);
  if (const auto r = root["return"]) {
    const auto kind = scalar<std::string>(r, "return");
    if (kind == "undiscounted") cfg.returns = ReturnKind::undiscounted;
    else if (kind == "discounted") cfg.returns = ReturnKind::discounted;
    else throw ConfigError("return", "expected undiscounted or discounted");
  }
  std::size_t exact_horizon = 0;
  read_size(root, "", "exact_eval_every", cfg.exact_eval_every);
  read_size(root, "", "exact_eval_horizon", exact_horizon);
  read_size(root, "", "parallel_runs", cfg.parallel_runs);

  cfg.tsivr.gamma = cfg.reinforce.gamma = cfg.gamma;
  cfg.tsivr.exact_eval_every = cfg.reinforce.exact_eval_every = cfg.exact_eval_every;
  cfg.tsivr.exact_eval_horizon = cfg.reinforce.exact_eval_horizon = exact_horizon;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace tsivr
