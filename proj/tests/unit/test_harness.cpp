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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"

namespace tsivr {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tsivr_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig data_config(const std::string& file, const fs::path& out) {
  auto cfg = load_config(std::string(TSIVR_TEST_DATA_DIR) + "/" + file);
  cfg.output_dir = out.string();
  return cfg;
}

TEST(Quantile, MatchesNaiveOnRandomData) {
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<double> v(n);
    for (auto& x : v) x = 10.0 * (uniform01(rng) - 0.5);
    for (double q : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0, uniform01(rng)})
      EXPECT_NEAR(quantile(v, q), testing::naive_quantile(v, q), 1e-12);
  }
}

TEST(Quantile, SmallCases) {
  EXPECT_EQ(quantile({1.0, 2.0, 9.0}, 0.5), 2.0);
  EXPECT_EQ(quantile({4.0}, 0.25), 4.0);
  EXPECT_EQ(quantile({4.0}, 0.75), 4.0);
  EXPECT_THROW(quantile({}, 0.5), std::invalid_argument);
  EXPECT_THROW(quantile({1.0}, 1.5), std::invalid_argument);
}

TEST(MovingAverage, Window) {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  const auto m = moving_average(v, 2);
  EXPECT_EQ(m, (std::vector<double>{1.0, 1.5, 2.5, 3.5, 4.5}));
  EXPECT_EQ(moving_average(v, 50).back(), 3.0);
  EXPECT_THROW(moving_average(v, 0), std::invalid_argument);
}

TEST(Summarize, SingleRunAndBrackets) {
  const std::vector<double> x = {1, 2, 3};
  const auto one = summarize(x, {{0.5, 0.1, 0.7}});
  for (const auto& p : one.points) {
    EXPECT_EQ(p.q25, p.median);
    EXPECT_EQ(p.q75, p.median);
  }
  Rng rng(2);
  std::vector<std::vector<double>> runs(7, std::vector<double>(3));
  for (auto& r : runs)
    for (auto& v : r) v = uniform01(rng);
  for (const auto& p : summarize(x, runs).points) {
    EXPECT_LE(p.q25, p.median);
    EXPECT_LE(p.median, p.q75);
  }
  const auto three = summarize(std::vector<double>{1}, {{1.0}, {2.0}, {9.0}});
  EXPECT_EQ(three.points[0].median, 2.0);
}

TEST(ReturnCurve, CheckpointsUseSmoothedValues) {
  std::vector<double> r(10);
  for (int i = 0; i < 10; ++i) r[i] = i;
  const auto c = return_curve({r}, 3, 4);
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0].episodes, 4.0);
  EXPECT_EQ(c.points[0].median, 2.0);  // mean of 1, 2, 3
  EXPECT_EQ(c.points[1].median, 6.0);  // mean of 5, 6, 7
}

TEST(CurveCsv, Schema) {
  CurveSummary c;
  c.points.push_back({100, 0.25, 0.125, 0.5});
  std::ostringstream out;
  c.write_csv(out);
  EXPECT_EQ(out.str(), "episodes,median,q25,q75\n100,0.25,0.125,0.5\n");
}

TEST(FitLine, ExactAndDegenerate) {
  const std::vector<double> x = {1, 2, 3, 4}, y = {1, -1, -3, -5};
  const auto fit = fit_line(x, y);
  EXPECT_NEAR(fit.slope, -2.0, 1e-14);
  EXPECT_NEAR(fit.intercept, 3.0, 1e-14);
  const std::vector<double> same = {2, 2}, ys = {1, 1};
  EXPECT_THROW(fit_line(same, ys), DegenerateData);
  EXPECT_THROW(fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}), DegenerateData);
}

TEST(Config, DefaultsMirrorTabularSettings) {
  const auto cfg = parse_config("environment: frozenlake8x8\n");
  EXPECT_EQ(cfg.tsivr.N, 100u);
  EXPECT_EQ(cfg.tsivr.B, 10u);
  EXPECT_EQ(cfg.tsivr.m, 10u);
  EXPECT_EQ(cfg.tsivr.H, 200u);
  EXPECT_EQ(cfg.tsivr.eta, 0.1);
  EXPECT_EQ(cfg.tsivr.delta, 0.01);
  EXPECT_EQ(cfg.gamma, 0.99);
  EXPECT_EQ(cfg.reinforce.eta, 0.05);
  EXPECT_EQ(cfg.smoothing_window, 50u);
  EXPECT_EQ(cfg.utility.sigma, 0.125);
  EXPECT_EQ(cfg.returns, ReturnKind::undiscounted);
  EXPECT_EQ(cfg.slope.final_window, 50u);
}

TEST(Config, ParsesEverySection) {
  const auto cfg = parse_config(R"(
experiment: slope
environment: corridor5
gamma: 0.9
algorithm: tsivr_pg
utility: {kind: linear}
tsivr_pg: {N: 4, B: 2, m: 2, H: 10, eta: 1.5, delta: 0.2, epochs: 3, truncation: false, threads: 2}
reinforce: {N: 5, H: 11, eta: 0.2, iterations: 7}
init: {kind: normal, scale: 0.1}
slope: {N: [4, 16], epsilons: [0.25], epochs: 5, final_window: 20}
runs: 4
seed: 99
output: somewhere
return: discounted
parallel_runs: 2
)");
  EXPECT_EQ(cfg.experiment, ExperimentKind::slope);
  EXPECT_EQ(cfg.tsivr.gamma, 0.9);
  EXPECT_EQ(cfg.reinforce.gamma, 0.9);
  EXPECT_FALSE(cfg.tsivr.truncation_enabled);
  EXPECT_EQ(cfg.tsivr.T, 3u);
  EXPECT_EQ(cfg.reinforce.iterations, 7u);
  EXPECT_EQ(cfg.slope.N_values, (std::vector<std::size_t>{4, 16, 16}));
  EXPECT_EQ(cfg.seed_base, 99u);
  EXPECT_EQ(cfg.init.kind, "normal");
  EXPECT_EQ(cfg.returns, ReturnKind::discounted);
}

std::string error_field(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(Config, ErrorsCarryFieldPath) {
  EXPECT_EQ(error_field("tsivr_pg: {eta: -1}\n"), "tsivr_pg.eta");
  EXPECT_EQ(error_field("tsivr_pg: {N: 0}\n"), "tsivr_pg.N");
  EXPECT_EQ(error_field("tsivr_pg: {bogus: 1}\n"), "tsivr_pg.bogus");
  EXPECT_EQ(error_field("reinforce: {eta: abc}\n"), "reinforce.eta");
  EXPECT_EQ(error_field("runs: 0\n"), "runs");
  EXPECT_EQ(error_field("gamma: 1.0\n"), "gamma");
  EXPECT_EQ(error_field("algorithm: sgd\n"), "algorithm");
  EXPECT_EQ(error_field("utility: {kind: cubic}\n"), "utility.kind");
  EXPECT_EQ(error_field("smoothing_window: 0\n"), "smoothing_window");
  EXPECT_EQ(error_field("experiment: slope\nslope: {N: [4]}\n"), "slope.N");
  EXPECT_EQ(error_field("slope: {epsilons: [2.0]}\n"), "slope.epsilons[0]");
  EXPECT_EQ(error_field("utility: {set: {kind: cone}}\n"), "utility.set.kind");
  EXPECT_EQ(error_field("a: [1, 2\n"), "<root>");
  EXPECT_EQ(error_field(""), "<root>");
}

TEST(Experiment, GoldenFiles) {
  const auto out = fresh_dir("golden");
  run_experiment(data_config("tiny_curve.yaml", out));
  const fs::path golden = fs::path(TSIVR_TEST_DATA_DIR) / ".." / "golden" / "tiny_curve";
  for (const char* f : {"curve.csv", "run_0.csv", "run_2.csv"})
    EXPECT_EQ(slurp(out / f), slurp(golden / f)) << f;
  fs::remove_all(out);
}

TEST(Experiment, ByteIdenticalAcrossInvocationsAndParallelism) {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  auto cfg = data_config("tiny_curve.yaml", a);
  run_experiment(cfg);
  cfg.output_dir = b.string();
  cfg.parallel_runs = 3;
  cfg.tsivr.threads = 2;
  run_experiment(cfg);
  for (const char* f : {"curve.csv", "run_0.csv", "run_1.csv", "run_2.csv", "run_1.policy"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, SingleRunQuartilesEqualMedian) {
  const auto out = fresh_dir("single");
  auto cfg = data_config("tiny_curve.yaml", out);
  cfg.num_runs = 1;
  const auto res = run_experiment(cfg);
  ASSERT_FALSE(res.curve.points.empty());
  for (const auto& p : res.curve.points) {
    EXPECT_EQ(p.q25, p.median);
    EXPECT_EQ(p.q75, p.median);
  }
  fs::remove_all(out);
}

TEST(Experiment, ReinforceCurve) {
  const auto out = fresh_dir("reinforce");
  auto cfg = data_config("tiny_curve.yaml", out);
  cfg.algorithm = Algorithm::reinforce;
  cfg.reinforce.N = 4;
  cfg.reinforce.H = 5;
  cfg.reinforce.iterations = 6;
  const auto res = run_experiment(cfg);
  EXPECT_EQ(res.curve.points.back().episodes, 24.0);
  fs::remove_all(out);
}

TEST(Experiment, FailedRunsStillFlushCompletedOnes) {
  const auto out = fresh_dir("partial");
  auto cfg = data_config("tiny_curve.yaml", out);
  cfg.environment = "frozenlake8x8";
  cfg.gamma = cfg.tsivr.gamma = cfg.reinforce.gamma = 0.99;
  cfg.tsivr.truncation_enabled = false;
  cfg.utility.kind = "log_barrier";
  cfg.tsivr.N = 20;
  cfg.tsivr.B = 20;
  cfg.tsivr.m = 3;
  cfg.tsivr.H = 60;
  cfg.tsivr.eta = 0.02;
  cfg.tsivr.T = 1;
  cfg.tsivr.weight_guard = 5.0;
  cfg.init = {"normal", 1.0};
  cfg.num_runs = 8;
  EXPECT_THROW(run_experiment(cfg), WeightExplosion);
  EXPECT_FALSE(fs::exists(out / "curve.csv"));
  std::size_t written = 0;
  for (std::size_t k = 0; k < cfg.num_runs; ++k) written += fs::exists(out / ("run_" + std::to_string(k) + ".csv"));
  EXPECT_GT(written, 0u);
  EXPECT_LT(written, cfg.num_runs);
  fs::remove_all(out);
}

TEST(Experiment, NonlinearExactTrackIsSeedFree) {
  const auto a = fresh_dir("nl_a"), b = fresh_dir("nl_b");
  auto cfg = data_config("tiny_nonlinear.yaml", a);
  const auto ra = nonlinear_run(cfg);
  cfg.output_dir = b.string();
  cfg.seed_base = 12345;
  const auto rb = nonlinear_run(cfg);
  ASSERT_TRUE(ra.exact_curve && rb.exact_curve);
  // zero initialization: the first exact point is the uniform policy for every seed
  EXPECT_EQ(ra.exact_curve->points.front().median, rb.exact_curve->points.front().median);
  EXPECT_EQ(ra.exact_curve->points.front().q25, ra.exact_curve->points.front().q75);
  EXPECT_TRUE(fs::exists(a / "exact_curve.csv"));
  EXPECT_EQ(ra.exact_curve->points.size(), 3u);  // iterations 0 and 3, plus the final iterate
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(SlopeStudy, EpisodeAccountingAndOutputs) {
  const auto out = fresh_dir("slope");
  auto cfg = parse_config(R"(
experiment: slope
environment: corridor5
gamma: 0.9
utility: {kind: linear}
tsivr_pg: {H: 20, eta: 1.0, delta: 0.1}
slope: {N: [4, 9, 16], epochs: 3, final_window: 10}
runs: 2
seed: 1
return: discounted
)");
  cfg.output_dir = out.string();
  const auto res = slope_study(cfg);
  ASSERT_EQ(res.points.size(), 3u);
  for (const auto& p : res.points) {
    EXPECT_EQ(p.B * p.B, p.N);
    EXPECT_EQ(p.m, p.B);
    EXPECT_EQ(p.episodes, 3.0 * (p.N + p.B * p.m));
    EXPECT_EQ(p.episodes, 6.0 * p.N);
  }
  EXPECT_NEAR(res.optimal_value, value_iteration(make_environment("corridor5", 0.9),
                                                 *make_environment("corridor5", 0.9).reward()).optimal_value, 1e-12);
  EXPECT_TRUE(fs::exists(out / "slope.csv"));
  EXPECT_EQ(slurp(out / "slope.csv").substr(0, 36), "N,B,m,episodes,mean_return,gap,log_e");
  fs::remove_all(out);
}

int cli(const std::string& args) {
  const int status = std::system((std::string(TSIVR_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto out = fresh_dir("cli");
  const std::string cfg = std::string(TSIVR_TEST_DATA_DIR) + "/tiny_curve.yaml";
  EXPECT_EQ(cli("run " + cfg + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "curve.csv"));
  EXPECT_EQ(cli("run " + cfg + " --out " + out.string() + " --algorithm sgd"), 2);
  EXPECT_EQ(cli("run " + cfg + " --out " + out.string() + " --runs 0"), 2);
  EXPECT_EQ(cli("run /nonexistent.yaml"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);

  const auto bad = out / "bad.yaml";
  std::ofstream(bad) << "environment: frozenlake8x8\ntsivr_pg: {eta: 0}\n";
  EXPECT_EQ(cli("run " + bad.string()), 2);
  const auto missing = out / "missing_env.yaml";
  std::ofstream(missing) << "environment: /nonexistent/file.mdp\noutput: " << (out / "x").string() << "\n";
  EXPECT_EQ(cli("run " + missing.string()), 3);
  fs::remove_all(out);
}

TEST(Cli, OutputDirectoryPrecedence) {
  const auto base = fresh_dir("cli_env");
  const std::string cfg = std::string(TSIVR_TEST_DATA_DIR) + "/tiny_curve.yaml";
  const auto env_dir = base / "from_env", flag_dir = base / "from_flag";
  ASSERT_EQ(::setenv("TSIVR_OUTPUT_DIR", env_dir.c_str(), 1), 0);
  EXPECT_EQ(cli("run " + cfg + " --runs 1"), 0);
  EXPECT_TRUE(fs::exists(env_dir / "curve.csv"));
  EXPECT_EQ(cli("run " + cfg + " --runs 1 --out " + flag_dir.string()), 0);
  EXPECT_TRUE(fs::exists(flag_dir / "curve.csv"));
  ::unsetenv("TSIVR_OUTPUT_DIR");
  fs::remove_all(base);
}

}  // namespace
}  // namespace tsivr
