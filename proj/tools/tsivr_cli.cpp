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
#include <tsivr/envs.hpp>
#include <tsivr/harness.hpp>
#include <tsivr/tsivr_pg.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr const char* kOutputEnv = "TSIVR_OUTPUT_DIR";

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::string> out;
  std::optional<std::string> algorithm;
};

void print_curve_tail(const tsivr::CurveSummary& curve, const char* label) {
  if (curve.points.empty()) return;
  const auto& p = curve.points.back();
  std::printf("%s: episodes=%.10g median=%.6g q25=%.6g q75=%.6g\n", label, p.episodes, p.median, p.q25, p.q75);
}

int run_command(const RunOptions& opt) {
  tsivr::ExperimentConfig cfg;
  try {
    cfg = tsivr::load_config(opt.config);
    if (opt.seed) cfg.seed_base = *opt.seed;
    if (opt.runs) cfg.num_runs = *opt.runs;
    if (const char* env = std::getenv(kOutputEnv); env && *env) cfg.output_dir = env;
    if (opt.out) cfg.output_dir = *opt.out;
    if (opt.algorithm) cfg.algorithm = tsivr::algorithm_from_string(*opt.algorithm);
    cfg.validate();
  } catch (const tsivr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }

  try {
    switch (cfg.experiment) {
      case tsivr::ExperimentKind::curve: {
        const auto res = tsivr::run_experiment(cfg);
        print_curve_tail(res.curve, "return");
        break;
      }
      case tsivr::ExperimentKind::nonlinear: {
        const auto res = tsivr::nonlinear_run(cfg);
        print_curve_tail(res.curve, "utility estimate");
        if (res.exact_curve) print_curve_tail(*res.exact_curve, "exact utility");
        break;
      }
      case tsivr::ExperimentKind::slope: {
        const auto res = tsivr::slope_study(cfg);
        for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        std::printf("optimal value %.6g\n", res.optimal_value);
        for (const auto& p : res.points)
          std::printf("N=%zu B=m=%zu episodes=%.10g return=%.6g gap=%.6g\n", p.N, p.B, p.episodes, p.mean_return,
                      p.gap);
        std::printf("slope %.4f\n", res.fit.slope);
        break;
      }
    }
  } catch (const tsivr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed: %s\n", e.what());
    return kExitRuntime;
  }
  std::printf("results written to %s\n", cfg.output_dir.c_str());
  return 0;
}

int value_iteration_command(const std::string& env, double gamma) {
  try {
    const auto model = tsivr::make_environment(env, gamma);
    if (!model.reward()) {
      std::fprintf(stderr, "%s has no reward table\n", env.c_str());
      return kExitConfig;
    }
    const auto& r = *model.reward();
    const auto vi = tsivr::value_iteration(model, std::span<const double>(r.data(), r.size()));
    std::printf("optimal value %.10g after %zu sweeps\n", vi.optimal_value, vi.iterations);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}

int schedule_command(double epsilon, double gamma, double lpsi) {
  try {
    const auto s = tsivr::schedule_from_epsilon(epsilon, gamma, lpsi);
    std::printf("H=%zu delta=%.10g N=%zu B=%zu m=%zu T=%zu T_global=%zu samples=%.10g\n", s.H, s.delta, s.N, s.B,
                s.m, s.T, s.T_global, s.total_samples);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated stochastic incremental variance-reduced policy gradient experiments"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
  run_cmd->add_option("config", run.config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "seed base; run k uses seed + k");
  run_cmd->add_option("--runs", run.runs, "number of independent runs");
  run_cmd->add_option("--out", run.out, std::string("output directory (overrides ") + kOutputEnv + ")");
  run_cmd->add_option("--algorithm", run.algorithm, "tsivr_pg or reinforce");

  std::string vi_env;
  double vi_gamma = 0.99;
  auto* vi_cmd = app.add_subcommand("value-iteration", "optimal discounted value of an environment");
  vi_cmd->add_option("environment", vi_env, "built-in name or MDP file")->required();
  vi_cmd->add_option("--gamma", vi_gamma, "discount factor");

  double epsilon = 0.1, sched_gamma = 0.99, lpsi = 1.0;
  auto* sched_cmd = app.add_subcommand("schedule", "parameters implied by a target accuracy");
  sched_cmd->add_option("--epsilon", epsilon)->required();
  sched_cmd->add_option("--gamma", sched_gamma);
  sched_cmd->add_option("--lpsi", lpsi, "feature-map gradient bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (*run_cmd) return run_command(run);
  if (*vi_cmd) return value_iteration_command(vi_env, vi_gamma);
  return schedule_command(epsilon, sched_gamma, lpsi);
}
