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
#include <tsivr/csv.hpp>
#include <tsivr/envs.hpp>
#include <tsivr/harness.hpp>
#include <tsivr/oracle.hpp>
#include <tsivr/rng.hpp>
#include <tsivr/tsivr_pg.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <thread>

namespace tsivr {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
  if (window == 0) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const std::size_t begin = k + 1 > window ? k + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t i = begin; i <= k; ++i) sum += values[i];
    out[k] = sum / static_cast<double>(k + 1 - begin);
  }
  return out;
}

void CurveSummary::write_csv(std::ostream& out) const {
  CsvWriter csv(out);
  csv.header({"episodes", "median", "q25", "q75"});
  for (const auto& p : points) csv.field(p.episodes).field(p.median).field(p.q25).field(p.q75).end_row();
}

CurveSummary summarize(std::span<const double> x, const std::vector<std::vector<double>>& runs) {
  if (runs.empty()) throw std::invalid_argument("summarize: no runs");
  for (const auto& r : runs)
    if (r.size() != x.size()) throw std::invalid_argument("summarize: run length does not match the x axis");
  CurveSummary summary;
  std::vector<double> column(runs.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (std::size_t i = 0; i < runs.size(); ++i) column[i] = runs[i][k];
    summary.points.push_back({x[k], quantile(column, 0.5), quantile(column, 0.25), quantile(column, 0.75)});
  }
  return summary;
}

CurveSummary return_curve(const std::vector<std::vector<double>>& episode_returns, std::size_t window,
                          std::size_t interval) {
  if (episode_returns.empty()) throw std::invalid_argument("return_curve: no runs");
  if (interval == 0) throw std::invalid_argument("return_curve: interval must be >= 1");
  std::size_t len = episode_returns.front().size();
  for (const auto& r : episode_returns) len = std::min(len, r.size());
  std::vector<double> x;
  for (std::size_t e = interval; e <= len; e += interval) x.push_back(static_cast<double>(e));
  std::vector<std::vector<double>> sampled;
  for (const auto& r : episode_returns) {
    const auto smooth = moving_average(std::span<const double>(r.data(), len), window);
    std::vector<double> row;
    for (const double e : x) row.push_back(smooth[static_cast<std::size_t>(e) - 1]);
    sampled.push_back(std::move(row));
  }
  return summarize(x, sampled);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: x and y differ in length");
  if (x.size() < 2) throw DegenerateData("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-12 * std::max(1.0, mx * mx) * n)) throw DegenerateData("fit_line: x values are not distinct");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

Environment build_environment(const ExperimentConfig& cfg) {
  Environment env;
  auto model = std::make_shared<MdpModel>(make_environment(cfg.environment, cfg.gamma));
  const auto S = model->num_states();
  const auto A = model->num_actions();
  env.features = std::make_shared<TabularFeatures>(S, A);
  const auto& u = cfg.utility;
  if (u.kind == "linear") {
    Vector r;
    if (u.reward.size() != 0) {
      if (static_cast<std::size_t>(u.reward.size()) != S * A)
        throw ConfigError("utility.reward", "needs " + std::to_string(S * A) + " entries");
      r = u.reward;
    } else if (model->reward()) {
      const auto& table = *model->reward();
      r = Eigen::Map<const Vector>(table.data(), static_cast<Eigen::Index>(table.size()));
    } else {
      throw ConfigError("utility.reward", "the environment has no reward table");
    }
    env.utility = linear_utility(std::move(r));
  } else if (u.kind == "entropy") {
    env.utility = entropy_utility(S, A, cfg.gamma, u.floor);
  } else if (u.kind == "log_barrier") {
    env.utility = log_barrier_utility(S, A, u.sigma);
  } else if (u.kind == "set_distance") {
    if (static_cast<std::size_t>(u.feedback.cols()) != S * A)
      throw ConfigError("utility.feedback", "needs " + std::to_string(S * A) + " columns");
    env.utility = set_distance_utility(u.feedback, u.set, 1.0 / (1.0 - cfg.gamma));
  } else {
    throw ConfigError("utility.kind", "unknown utility '" + u.kind + "'");
  }
  env.model = std::move(model);
  return env;
}

PolicyParams initial_params(const ExperimentConfig& cfg, const FeatureMap& fm, std::size_t run_index) {
  auto params = PolicyParams::zeros(fm.dim());
  if (cfg.init.kind == "normal" && cfg.init.scale > 0.0) {
    // stream indices chosen to stay clear of the sampling streams
    auto rng = make_stream(cfg.seed_base + run_index, ~std::uint64_t{0}, ~std::uint64_t{0}, 0);
    for (Eigen::Index i = 0; i < params.theta.size(); ++i) params.theta[i] = cfg.init.scale * standard_normal(rng);
  }
  return params;
}

namespace {

// Runs f(i) for i in [0, n) on up to `workers` threads. Every index runs to
// completion or failure; errors are returned per index.
template <typename F>
std::vector<std::exception_ptr> parallel_for(std::size_t n, std::size_t workers, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto count = std::min(workers, n);
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
  }
  return errors;
}

RunResult single_run(const ExperimentConfig& cfg, const Environment& env, std::size_t run_index) {
  const auto theta0 = initial_params(cfg, *env.features, run_index);
  const std::uint64_t seed = cfg.seed_base + run_index;
  if (cfg.algorithm == Algorithm::tsivr_pg) {
    auto algo = cfg.tsivr;
    algo.seed = seed;
    if (!algo.checkpoint_dir.empty())
      algo.checkpoint_dir = (std::filesystem::path(algo.checkpoint_dir) / ("run_" + std::to_string(run_index))).string();
    return run(*env.model, *env.features, *env.utility, algo, theta0);
  }
  auto base = cfg.reinforce;
  base.seed = seed;
  return run_reinforce(*env.model, *env.features, *env.utility, base, theta0);
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<double> returns_of(const RunTrace& trace, ReturnKind kind) {
  std::vector<double> out;
  out.reserve(trace.episodes.size());
  for (const auto& e : trace.episodes) out.push_back(kind == ReturnKind::discounted ? e.discounted : e.undiscounted);
  return out;
}

ExperimentResult execute(const ExperimentConfig& cfg, bool utility_curve) {
  cfg.validate();
  const auto env = build_environment(cfg);
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);

  std::vector<RunResult> runs(cfg.num_runs);
  std::vector<double> final_exact(cfg.num_runs, 0.0);
  const auto errors = parallel_for(cfg.num_runs, cfg.parallel_runs, [&](std::size_t k) {
    runs[k] = single_run(cfg, env, k);
    if (utility_curve)
      final_exact[k] = exact_objective(*env.model, *env.features, runs[k].final_params, *env.utility,
                                       cfg.tsivr.exact_eval_horizon);
  });

  // single collector: every file is written from this thread, in run order
  std::exception_ptr first_error;
  std::vector<std::size_t> done;
  for (std::size_t k = 0; k < cfg.num_runs; ++k) {
    if (errors[k]) {
      if (!first_error) first_error = errors[k];
      continue;
    }
    done.push_back(k);
    const auto stem = "run_" + std::to_string(k);
    write_file(dir / (stem + ".csv"), [&](std::ostream& out) { runs[k].trace.write_csv(out); });
    write_file(dir / (stem + ".policy"),
               [&](std::ostream& out) { write_params(out, env.features->kind(), runs[k].final_params); });
  }
  if (first_error) std::rethrow_exception(first_error);

  ExperimentResult result;
  if (utility_curve) {
    // exact evaluations happen before the step, so they are placed at the
    // trajectory count consumed up to that iterate
    std::vector<double> x, exact_x;
    std::vector<std::vector<double>> est(runs.size()), exact(runs.size());
    const auto& ref = runs.front().trace.iterations;
    std::size_t consumed = 0;
    for (const auto& rec : ref) {
      x.push_back(static_cast<double>(rec.trajectories));
      if (!std::isnan(rec.exact_objective)) exact_x.push_back(static_cast<double>(consumed));
      consumed = rec.trajectories;
    }
    exact_x.push_back(static_cast<double>(consumed));
    for (std::size_t k = 0; k < runs.size(); ++k) {
      for (const auto& rec : runs[k].trace.iterations) {
        est[k].push_back(rec.utility_estimate);
        if (!std::isnan(rec.exact_objective)) exact[k].push_back(rec.exact_objective);
      }
      exact[k].push_back(final_exact[k]);
    }
    result.curve = summarize(x, est);
    result.exact_curve = summarize(exact_x, exact);
    write_file(dir / "exact_curve.csv", [&](std::ostream& out) { result.exact_curve->write_csv(out); });
  } else {
    std::vector<std::vector<double>> returns;
    for (const auto& r : runs) returns.push_back(returns_of(r.trace, cfg.returns));
    result.curve = return_curve(returns, cfg.smoothing_window, cfg.curve_interval);
  }
  write_file(dir / "curve.csv", [&](std::ostream& out) { result.curve.write_csv(out); });
  result.runs = std::move(runs);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return execute(cfg, cfg.experiment == ExperimentKind::nonlinear);
}

ExperimentResult nonlinear_run(const ExperimentConfig& cfg) {
  auto c = cfg;
  c.experiment = ExperimentKind::nonlinear;
  if (c.exact_eval_every == 0) c.exact_eval_every = c.tsivr.exact_eval_every = c.reinforce.exact_eval_every = 1;
  return execute(c, true);
}

SlopeResult slope_study(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.utility.kind != "linear") throw ConfigError("utility.kind", "slope study needs a linear utility");
  if (cfg.slope.N_values.size() < 2) throw ConfigError("slope.N", "needs at least two values");
  const auto env = build_environment(cfg);
  const auto reward = env.utility->grad(Vector::Zero(static_cast<Eigen::Index>(env.model->num_states() *
                                                                                env.model->num_actions())));
  SlopeResult result;
  result.optimal_value = value_iteration(*env.model, std::span<const double>(reward.data(), reward.size()))
                             .optimal_value;

  const auto& Ns = cfg.slope.N_values;
  const std::size_t R = cfg.num_runs;
  std::vector<double> final_returns(Ns.size() * R);
  const auto errors = parallel_for(Ns.size() * R, cfg.parallel_runs, [&](std::size_t job) {
    const std::size_t p = job / R, k = job % R;
    auto algo = cfg.tsivr;
    algo.N = Ns[p];
    algo.B = algo.m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(Ns[p])) - 1e-9));
    algo.T = cfg.slope.epochs;
    algo.seed = cfg.seed_base + k;
    algo.checkpoint_dir.clear();
    algo.exact_eval_every = 0;
    const auto res = run(*env.model, *env.features, *env.utility, algo, initial_params(cfg, *env.features, k));
    const auto& eps = res.trace.episodes;
    const std::size_t w = std::min(cfg.slope.final_window, eps.size());
    double sum = 0.0;
    for (std::size_t i = eps.size() - w; i < eps.size(); ++i) sum += eps[i].discounted;
    final_returns[job] = sum / static_cast<double>(w);
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> xs, ys;
  for (std::size_t p = 0; p < Ns.size(); ++p) {
    SlopePoint pt;
    pt.N = Ns[p];
    pt.B = pt.m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(Ns[p])) - 1e-9));
    pt.episodes = static_cast<double>(cfg.slope.epochs) * static_cast<double>(pt.N + pt.B * pt.m);
    std::vector<double> logs;
    double sum = 0.0;
    for (std::size_t k = 0; k < R; ++k) {
      const double r = final_returns[p * R + k];
      sum += r;
      if (result.optimal_value - r > 0.0) logs.push_back(std::log(result.optimal_value - r));
    }
    pt.mean_return = sum / static_cast<double>(R);
    pt.gap = result.optimal_value - pt.mean_return;
    pt.log_episodes = std::log(pt.episodes);
    if (logs.size() > 1) {
      const double mean = std::accumulate(logs.begin(), logs.end(), 0.0) / static_cast<double>(logs.size());
      double ss = 0.0;
      for (const double l : logs) ss += (l - mean) * (l - mean);
      pt.std_log_gap = std::sqrt(ss / static_cast<double>(logs.size() - 1));
    }
    if (pt.gap > 0.0) {
      pt.log_gap = std::log(pt.gap);
      xs.push_back(pt.log_episodes);
      ys.push_back(pt.log_gap);
    } else {
      pt.dropped = true;
      pt.log_gap = std::numeric_limits<double>::quiet_NaN();
      char buf[128];
      std::snprintf(buf, sizeof buf, "N=%zu: nonpositive gap %.3g, point dropped", pt.N, pt.gap);
      result.warnings.emplace_back(buf);
    }
    result.points.push_back(pt);
  }
  result.fit = fit_line(xs, ys);

  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "slope.csv", [&](std::ostream& out) {
    CsvWriter csv(out);
    csv.header({"N", "B", "m", "episodes", "mean_return", "gap", "log_episodes", "log_gap", "std_log_gap", "dropped"});
    for (const auto& p : result.points)
      csv.field(p.N).field(p.B).field(p.m).field(p.episodes).field(p.mean_return).field(p.gap)
          .field(p.log_episodes).field(p.log_gap).field(p.std_log_gap).field(std::size_t{p.dropped}).end_row();
  });
  write_file(dir / "slope_fit.csv", [&](std::ostream& out) {
    CsvWriter csv(out);
    csv.header({"slope", "intercept", "optimal_value", "points"});
    csv.field(result.fit.slope).field(result.fit.intercept).field(result.optimal_value).field(xs.size()).end_row();
  });
  return result;
}

}  // namespace tsivr
