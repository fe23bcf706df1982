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
#include <tsivr/estimators.hpp>
#include <tsivr/oracle.hpp>
#include <tsivr/tsivr_pg.hpp>
#include <tsivr/utilities.hpp>

#include <benchmark/benchmark.h>

namespace tsivr {
namespace {

PolicyParams random_params(std::size_t dim, std::uint64_t seed) {
  auto rng = make_stream(seed, 0, 0, 0);
  Vector v(static_cast<Eigen::Index>(dim));
  for (auto& x : v) x = standard_normal(rng);
  return PolicyParams(v);
}

void BM_SampleTrajectory(benchmark::State& state) {
  const auto model = build_frozenlake8x8();
  const auto pi = uniform_policy(model);
  const auto H = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_trajectory(model, pi, H, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleTrajectory)->Arg(200)->Arg(1000);

void BM_OffPolicyGradient(benchmark::State& state) {
  const auto model = build_frozenlake8x8();
  TabularFeatures fm(64, 4);
  const auto t1 = random_params(fm.dim(), 1), t2 = random_params(fm.dim(), 2);
  const auto H = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const auto tau = sample_trajectory(model, EvaluatedPolicy::evaluate(fm, t1).probs, H, rng);
  const Vector r = Vector::Ones(256);
  for (auto _ : state) benchmark::DoNotOptimize(pg_estimate(tau, t1, t2, fm, as_span(r), 0.99));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OffPolicyGradient)->Arg(200);

void BM_ExactOccupancy(benchmark::State& state) {
  const auto model = build_frozenlake8x8();
  const auto pi = uniform_policy(model);
  for (auto _ : state) benchmark::DoNotOptimize(exact_occupancy(model, pi, InfiniteHorizon{}));
}
BENCHMARK(BM_ExactOccupancy);

void BM_ValueIteration(benchmark::State& state) {
  const auto model = build_frozenlake8x8();
  const auto r = *model.reward();
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(model, r));
}
BENCHMARK(BM_ValueIteration);

void BM_TruncatedJacobianProduct(benchmark::State& state) {
  const auto model = build_frozenlake8x8();
  TabularFeatures fm(64, 4);
  const auto theta = random_params(fm.dim(), 3);
  const auto r = *model.reward();
  for (auto _ : state) benchmark::DoNotOptimize(truncated_jacobian_product(model, fm, theta, r, 200));
}
BENCHMARK(BM_TruncatedJacobianProduct);

void BM_Epoch(benchmark::State& state) {
  const auto model = build_frozenlake8x8();
  TabularFeatures fm(64, 4);
  const auto u = log_barrier_utility(64, 4);
  const Problem problem{model, fm, *u};
  AlgoConfig cfg;
  std::size_t epoch = 0;
  for (auto _ : state) {
    auto s = epoch_anchor(problem, PolicyParams::zeros(fm.dim()), cfg, epoch);
    for (std::size_t j = 1; j < cfg.m; ++j) {
      const auto next = truncated_step(s.theta, s.grad_est, cfg.eta, cfg.delta);
      s = inner_update(problem, s, next, cfg);
    }
    benchmark::DoNotOptimize(s.grad_est);
    ++epoch;
  }
  state.SetLabel("N=100 B=10 m=10 H=200");
}
BENCHMARK(BM_Epoch)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace tsivr

BENCHMARK_MAIN();
