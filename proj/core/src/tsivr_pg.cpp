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
#include <tsivr/oracle.hpp>
#include <tsivr/tsivr_pg.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace tsivr {

void AlgoConfig::validate() const {
  auto fail = [](const char* field, const char* why) {
    throw std::invalid_argument(std::string(field) + ": " + why);
  };
  if (N == 0) fail("N", "must be >= 1");
  if (B == 0) fail("B", "must be >= 1");
  if (m == 0) fail("m", "must be >= 1");
  if (H == 0) fail("H", "must be >= 1");
  if (T == 0) fail("T", "must be >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) fail("eta", "must be > 0");
  if (!(delta > 0.0) || !std::isfinite(delta)) fail("delta", "must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma", "must lie in (0, 1)");
  if (threads == 0) fail("threads", "must be >= 1");
  if (!(weight_guard > 1.0)) fail("weight_guard", "must be > 1");
}

namespace {

double batch_weight(const WeightedBatch& batch, std::size_t i) {
  return batch.weights.empty() ? 1.0 / static_cast<double>(batch.trajectories.size()) : batch.weights[i];
}

void check_batch(const WeightedBatch& batch) {
  if (batch.trajectories.empty()) throw std::invalid_argument("empty trajectory batch");
  if (!batch.weights.empty() && batch.weights.size() != batch.trajectories.size())
    throw std::invalid_argument("batch weights do not match trajectories");
}

Vector zeros(std::size_t n) { return Vector::Zero(static_cast<Eigen::Index>(n)); }

}  // namespace

std::vector<EpisodeReturn> episode_returns(const MdpModel& model, std::span<const Trajectory> batch, double gamma) {
  std::vector<EpisodeReturn> out;
  const auto& reward = model.reward();
  if (!reward) return out;
  out.reserve(batch.size());
  for (const auto& tau : batch) {
    EpisodeReturn ret;
    double discount = 1.0;
    for (const auto& st : tau.steps) {
      const double r = (*reward)[model.index(st.state, st.action)];
      ret.discounted += discount * r;
      ret.undiscounted += r;
      discount *= gamma;
    }
    out.push_back(ret);
  }
  return out;
}

EpochState anchor_from_batch(const Problem& problem, const PolicyParams& theta0, const WeightedBatch& batch,
                             double gamma) {
  check_batch(batch);
  const auto& fm = problem.fm;
  const auto A = fm.num_actions();
  const auto pol = EvaluatedPolicy::evaluate(fm, theta0);

  EpochState state;
  state.theta = theta0;
  state.theta_prev = theta0;
  state.lambda_est.kind = OccupancyKind::sampled;
  state.lambda_est.horizon = batch.trajectories.front().horizon();
  state.lambda_est.entries = zeros(problem.model.num_pairs());
  for (std::size_t i = 0; i < batch.trajectories.size(); ++i)
    accumulate_occupancy(batch.trajectories[i], nullptr, gamma, A, batch_weight(batch, i), state.lambda_est.entries);

  state.quasi_reward = problem.utility.grad(state.lambda_est.entries);
  state.quasi_reward_prev = state.quasi_reward;
  state.grad_est = zeros(fm.dim());
  for (std::size_t i = 0; i < batch.trajectories.size(); ++i)
    accumulate_pg(batch.trajectories[i], nullptr, fm, theta0, pol, as_span(state.quasi_reward), gamma,
                  batch_weight(batch, i), state.grad_est);
  return state;
}

EpochState inner_from_batch(const Problem& problem, const EpochState& prev, const PolicyParams& theta,
                            const WeightedBatch& batch, double gamma) {
  check_batch(batch);
  const auto& fm = problem.fm;
  const auto A = fm.num_actions();
  const auto current = EvaluatedPolicy::evaluate(fm, theta);
  const auto previous = EvaluatedPolicy::evaluate(fm, prev.theta);

  EpochState state;
  state.theta = theta;
  state.theta_prev = prev.theta;
  state.epoch_index = prev.epoch_index;
  state.inner_index = prev.inner_index + 1;
  state.lambda_est = prev.lambda_est;
  state.grad_est = prev.grad_est;

  const double distance = (theta.theta - prev.theta.theta).norm();
  const double lpsi = fm.lipschitz_grad_bound();
  auto& diag = state.diagnostics;
  diag.param_distance = distance;
  diag.weight_bound = weight_bound(batch.trajectories.front().horizon() - 1, lpsi, distance);

  Vector correction = zeros(problem.model.num_pairs());
  for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
    const auto& tau = batch.trajectories[i];
    const double w = batch_weight(batch, i);
    // tau ~ pi_{theta_j}; the weights re-target it to pi_{theta_{j-1}}
    const auto weights = importance_weights(tau, current, previous);
    for (Eigen::Index t = 0; t < weights.weights.size(); ++t) {
      const double omega = weights.weights[t];
      diag.max_weight = std::max(diag.max_weight, omega);
      if (omega > weight_bound(static_cast<std::size_t>(t), lpsi, distance) * (1.0 + 1e-9)) ++diag.bound_violations;
    }
    // lambda_hat - lambda_hat_w coefficient per step, so a zero step adds exact zeros
    double discount = 1.0;
    for (std::size_t t = 0; t < tau.steps.size(); ++t) {
      const auto [s, a] = tau.steps[t];
      correction[static_cast<Eigen::Index>(s * A + a)] +=
          w * discount * (1.0 - weights.weights[static_cast<Eigen::Index>(t)]);
      discount *= gamma;
    }
    accumulate_pg(tau, nullptr, fm, theta, current, as_span(prev.quasi_reward), gamma, w, state.grad_est);
    accumulate_pg(tau, &weights, fm, prev.theta, previous, as_span(prev.quasi_reward_prev), gamma, -w,
                  state.grad_est);
  }
  state.lambda_est.entries += correction;
  state.quasi_reward = problem.utility.grad(state.lambda_est.entries);
  state.quasi_reward_prev = prev.quasi_reward;
  return state;
}

std::vector<Trajectory> sample_batch(const MdpModel& model, const PolicyMatrix& policy, std::size_t horizon,
                                     std::size_t count, std::uint64_t seed, std::size_t epoch, std::size_t inner,
                                     std::size_t threads) {
  std::vector<Trajectory> batch(count);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto tag = stream_seed(seed, epoch, inner, k);
      Rng rng(tag);
      batch[k] = sample_trajectory(model, policy, horizon, rng);
      batch[k].seed_tag = tag;
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    work(0, count);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (std::size_t begin = 0; begin < count; begin += chunk)
      pool.emplace_back(work, begin, std::min(count, begin + chunk));
  }
  return batch;
}

EpochState epoch_anchor(const Problem& problem, const PolicyParams& theta0, const AlgoConfig& cfg,
                        std::size_t epoch) {
  cfg.validate();
  const auto pol = EvaluatedPolicy::evaluate(problem.fm, theta0);
  const auto batch = sample_batch(problem.model, pol.probs, cfg.H, cfg.N, cfg.seed, epoch, 0, cfg.threads);
  auto state = anchor_from_batch(problem, theta0, {batch, {}}, cfg.gamma);
  state.epoch_index = epoch;
  state.diagnostics.episodes = episode_returns(problem.model, batch, cfg.gamma);
  return state;
}

EpochState inner_update(const Problem& problem, const EpochState& prev, const PolicyParams& theta,
                        const AlgoConfig& cfg) {
  const auto pol = EvaluatedPolicy::evaluate(problem.fm, theta);
  const auto batch = sample_batch(problem.model, pol.probs, cfg.H, cfg.B, cfg.seed, prev.epoch_index,
                                  prev.inner_index + 1, cfg.threads);
  auto state = inner_from_batch(problem, prev, theta, {batch, {}}, cfg.gamma);
  if (!cfg.truncation_enabled && state.diagnostics.max_weight > cfg.weight_guard) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "importance weight %.6g exceeds guard %.3g at epoch %zu, iteration %zu",
                  state.diagnostics.max_weight, cfg.weight_guard, state.epoch_index, state.inner_index);
    throw WeightExplosion(buf, state.diagnostics.max_weight);
  }
  state.diagnostics.episodes = episode_returns(problem.model, batch, cfg.gamma);
  return state;
}

PolicyParams truncated_step(const PolicyParams& theta, const Vector& g, double eta, double delta) {
  if (!(eta > 0.0) || !(delta > 0.0)) throw std::invalid_argument("truncated_step: eta and delta must be positive");
  if (g.size() != theta.theta.size()) throw std::invalid_argument("truncated_step: gradient has wrong size");
  const double norm = g.norm();
  double scale = eta * norm <= delta ? eta : delta / norm;
  Vector next = theta.theta + scale * g;
  // rounding in the addition can leave the realized step a few ulps past delta
  for (int k = 0; k < 64 && (next - theta.theta).norm() > delta; ++k) {
    scale *= 1.0 - 0x1.0p-40 * (k + 1);
    next = theta.theta + scale * g;
  }
  return PolicyParams(std::move(next));
}

Vector gradient_mapping(const PolicyParams& theta, const Vector& exact_grad, double eta, double delta) {
  const auto next = truncated_step(theta, exact_grad, eta, delta);
  return (next.theta - theta.theta) / eta;
}

namespace {

// ceil that ignores representation noise, so 1 / (0.1 * 0.1) gives 100
std::size_t robust_ceil(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x))); }

}  // namespace

Schedule schedule_from_epsilon(double epsilon, double gamma, double lipschitz_grad_bound) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("schedule_from_epsilon: epsilon must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("schedule_from_epsilon: gamma must lie in (0, 1)");
  if (!(lipschitz_grad_bound > 0.0)) throw std::invalid_argument("schedule_from_epsilon: l_psi must be positive");
  Schedule s;
  s.H = std::max<std::size_t>(1, robust_ceil(2.0 * std::log(1.0 / epsilon) / (1.0 - gamma)));
  s.delta = 1.0 / (2.0 * static_cast<double>(s.H) * lipschitz_grad_bound);
  s.B = robust_ceil(1.0 / epsilon);
  s.m = s.B;
  s.N = robust_ceil(1.0 / (epsilon * epsilon));
  s.T = robust_ceil(1.0 / epsilon);
  s.T_global = std::max<std::size_t>(1, robust_ceil(std::log2(1.0 / epsilon)));
  s.total_samples = static_cast<double>(s.T) * static_cast<double>(s.m) *
                    (static_cast<double>(s.B) * static_cast<double>(s.H) + static_cast<double>(s.N));
  return s;
}

double TheoryConstants::c_omega(double t) const {
  const double l = lipschitz_grad_bound;
  return t * (4.0 * l * l * (t + 0.5) + 2.0 * lipschitz_hessian_bound) * (std::exp(4.0 * delta * t) + 1.0);
}

TheoryConstants compute_constants(double lpsi, double Lpsi, const UtilityConstants& u, double gamma, std::size_t H,
                                  double delta) {
  if (!(lpsi > 0.0) || Lpsi < 0.0 || !(gamma > 0.0 && gamma < 1.0) || H == 0 || !(delta > 0.0))
    throw std::invalid_argument("compute_constants: constants must be positive and finite");
  const double c = 1.0 - gamma;
  const double l2 = lpsi * lpsi;
  const double linf = u.grad_inf_bound;
  const double Ll = u.smoothness_l2;
  const double Linf = u.smoothness_l1;
  const double h = static_cast<double>(H);
  const double blow = std::exp(2.0 * h * lpsi * delta) + 1.0;

  TheoryConstants k;
  k.lipschitz_grad_bound = lpsi;
  k.lipschitz_hessian_bound = Lpsi;
  k.delta = delta;
  k.L_theta = 4.0 * Linf * l2 / std::pow(c, 4) + 8.0 * l2 * linf / std::pow(c, 3) + 2.0 * linf * (Lpsi + l2) / (c * c);
  k.C1 = 112.0 * l2 * Ll * Ll / std::pow(c, 6) + 12.0 * linf * linf / std::pow(c, 4);
  k.C2 = 32.0 * l2 * Ll * Ll / std::pow(c, 6) +
         64.0 * l2 * linf * linf * ((h + 1.0) * (h + 1.0) / (c * c) + 1.0 / std::pow(c, 4));
  k.C3 = 48.0 * (lpsi + Lpsi) * (lpsi + Lpsi) * linf * linf / std::pow(c, 4) +
         96.0 * h * linf * linf * (8.0 * l2 + Lpsi) * blow / std::pow(c, 5) *
             (12.0 * linf * linf + 4.0 * Ll * Ll / (3.0 * c * c));
  k.C4 = 32.0 * h * l2 * Ll * Ll * (8.0 * l2 + Lpsi) * blow / std::pow(c, 7);
  if (k.L_theta > 0.0) {
    k.eta = 1.0 / (1.0 + (k.C3 + k.C4) / (k.L_theta * k.L_theta)) / (2.0 * k.L_theta);
    k.eta_global = 1.0 / (2.0 * k.L_theta + 8.0 * (k.C3 + k.C4) / k.L_theta);
  }
  return k;
}

std::uint64_t hash_vector(const Vector& v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()) * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void write_checkpoint(const std::string& dir, const EpochState& state, const PolicyParams& next,
                      FeatureKind kind, std::size_t iterations) {
  std::filesystem::create_directories(dir);
  char name[64];
  std::snprintf(name, sizeof name, "epoch_%04zu.ckpt", state.epoch_index);
  std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint in " + dir);
  char line[96];
  out << "tsivr-checkpoint 1\n";
  out << "epoch " << state.epoch_index << "\niterations " << iterations << '\n';
  std::snprintf(line, sizeof line, "lambda_hash %016llx\n", static_cast<unsigned long long>(hash_vector(state.lambda_est.entries)));
  out << line;
  std::snprintf(line, sizeof line, "quasi_reward_hash %016llx\n", static_cast<unsigned long long>(hash_vector(state.quasi_reward)));
  out << line;
  std::snprintf(line, sizeof line, "grad_hash %016llx\n", static_cast<unsigned long long>(hash_vector(state.grad_est)));
  out << line;
  write_params(out, kind, next);
}

}  // namespace

RunResult run(const MdpModel& model, const FeatureMap& fm, const Utility& utility, const AlgoConfig& cfg,
              const PolicyParams& theta0) {
  cfg.validate();
  if (fm.num_states() != model.num_states() || fm.num_actions() != model.num_actions())
    throw std::invalid_argument("run: feature map does not match the model");
  if (theta0.dim() != fm.dim()) throw std::invalid_argument("run: initial parameters have wrong dimension");
  if (!theta0.finite()) throw std::invalid_argument("run: initial parameters must be finite");
  if (cfg.gamma != model.discount()) throw std::invalid_argument("gamma: does not match the model discount");

  const auto start = std::chrono::steady_clock::now();
  const Problem problem{model, fm, utility};
  RunResult result;
  auto& trace = result.trace;
  trace.iterations.reserve(cfg.T * cfg.m);

  PolicyParams theta = theta0;
  std::size_t trajectories = 0;
  std::size_t iteration = 0;
  for (std::size_t epoch = 0; epoch < cfg.T; ++epoch) {
    EpochState state;
    for (std::size_t j = 0; j < cfg.m; ++j, ++iteration) {
      state = j == 0 ? epoch_anchor(problem, theta, cfg, epoch) : inner_update(problem, state, theta, cfg);
      if (state.diagnostics.bound_violations != 0 && cfg.truncation_enabled)
        throw std::logic_error("importance weight exceeded its deterministic bound");
      trajectories += j == 0 ? cfg.N : cfg.B;

      const Vector& g = state.grad_est;
      PolicyParams next = cfg.truncation_enabled ? truncated_step(theta, g, cfg.eta, cfg.delta)
                                                 : PolicyParams(theta.theta + cfg.eta * g);
      if (!next.finite()) throw NumericalFailure("run: parameters became non-finite");

      IterationRecord rec;
      rec.epoch = epoch;
      rec.inner = j;
      rec.trajectories = trajectories;
      rec.samples = trajectories * cfg.H;
      rec.step_norm = (next.theta - theta.theta).norm();
      rec.truncated = cfg.truncation_enabled && cfg.eta * g.norm() > cfg.delta;
      if (cfg.truncation_enabled && rec.step_norm > cfg.delta)
        throw std::logic_error("truncated step exceeded the radius");
      rec.grad_norm = g.norm();
      rec.lambda_l1 = state.lambda_est.l1_norm();
      rec.utility_estimate = utility.value(state.lambda_est.entries);
      rec.max_weight = state.diagnostics.max_weight;
      rec.weight_bound = state.diagnostics.weight_bound;
      if (!state.diagnostics.episodes.empty()) {
        double sum = 0.0;
        for (const auto& e : state.diagnostics.episodes) sum += e.discounted;
        rec.batch_return = sum / static_cast<double>(state.diagnostics.episodes.size());
        trace.episodes.insert(trace.episodes.end(), state.diagnostics.episodes.begin(),
                              state.diagnostics.episodes.end());
      }
      if (cfg.exact_eval_every != 0 && iteration % cfg.exact_eval_every == 0)
        rec.exact_objective = exact_objective(model, fm, theta, utility, cfg.exact_eval_horizon);
      trace.iterations.push_back(rec);
      theta = std::move(next);
    }
    if (!cfg.checkpoint_dir.empty()) write_checkpoint(cfg.checkpoint_dir, state, theta, fm.kind(), iteration);
  }
  result.final_params = theta;
  trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace tsivr
