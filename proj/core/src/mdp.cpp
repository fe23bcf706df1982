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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tsivr {
namespace {

constexpr double kRowTol = 1e-12;

void check_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument(what + ": negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRowTol) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": sums to " << sum;
    throw std::invalid_argument(os.str());
  }
}

template <typename Cdf>
std::uint32_t draw(const Cdf& cdf, double u) {
  // cumulative of the last entry is forced to exactly 1, so this always hits
  for (const auto& e : cdf) {
    if (u < e.cumulative) return e.state;
  }
  return cdf.back().state;
}

}  // namespace

MdpModel::MdpModel(std::size_t num_states, std::size_t num_actions, std::vector<double> transition,
                   std::vector<double> initial_dist, double discount,
                   std::optional<std::vector<double>> reward)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      initial_(std::move(initial_dist)),
      discount_(discount),
      reward_(std::move(reward)) {
  if (num_states_ == 0 || num_actions_ == 0) throw std::invalid_argument("MdpModel: empty state or action space");
  if (num_states_ > UINT32_MAX || num_actions_ > UINT32_MAX) throw std::invalid_argument("MdpModel: too many states");
  if (!(discount_ > 0.0 && discount_ < 1.0)) throw std::invalid_argument("MdpModel: discount must lie in (0, 1)");
  if (transition_.size() != num_states_ * num_actions_ * num_states_)
    throw std::invalid_argument("MdpModel: transition tensor has wrong size");
  if (initial_.size() != num_states_) throw std::invalid_argument("MdpModel: initial distribution has wrong size");
  if (reward_) {
    if (reward_->size() != num_pairs()) throw std::invalid_argument("MdpModel: reward has wrong size");
    for (double r : *reward_)
      if (!std::isfinite(r)) throw std::invalid_argument("MdpModel: non-finite reward");
  }
  check_distribution(initial_, "MdpModel: initial distribution");

  offsets_.reserve(num_pairs() + 1);
  offsets_.push_back(0);
  for (std::size_t s = 0; s < num_states_; ++s) {
    for (std::size_t a = 0; a < num_actions_; ++a) {
      const auto row = this->transition(s, a);
      check_distribution(row, "MdpModel: transition row (" + std::to_string(s) + ", " + std::to_string(a) + ")");
      double cum = 0.0;
      for (std::size_t n = 0; n < num_states_; ++n) {
        if (row[n] > 0.0) {
          cum += row[n];
          successors_.push_back({static_cast<std::uint32_t>(n), cum});
        }
      }
      successors_.back().cumulative = 1.0;
      offsets_.push_back(successors_.size());
    }
  }
  double cum = 0.0;
  for (std::size_t n = 0; n < num_states_; ++n) {
    if (initial_[n] > 0.0) {
      cum += initial_[n];
      initial_cdf_.push_back({static_cast<std::uint32_t>(n), cum});
    }
  }
  initial_cdf_.back().cumulative = 1.0;
}

std::uint32_t MdpModel::sample_initial(Rng& rng) const { return draw(initial_cdf_, uniform01(rng)); }

std::uint32_t MdpModel::sample_next(std::size_t s, std::size_t a, Rng& rng) const {
  return draw(successors(s, a), uniform01(rng));
}

MdpModel MdpModel::with_discount(double discount) const {
  return MdpModel(num_states_, num_actions_, transition_, initial_, discount, reward_);
}

MdpModel MdpModel::with_reward(std::vector<double> reward) const {
  return MdpModel(num_states_, num_actions_, transition_, initial_, discount_, std::move(reward));
}

Vector OccupancyVector::state_marginal(std::size_t num_actions) const {
  const auto n = static_cast<Eigen::Index>(entries.size() / num_actions);
  Vector out(n);
  for (Eigen::Index s = 0; s < n; ++s)
    out[s] = entries.segment(s * static_cast<Eigen::Index>(num_actions), static_cast<Eigen::Index>(num_actions)).sum();
  return out;
}

void validate_policy(const MdpModel& model, const PolicyMatrix& policy) {
  if (static_cast<std::size_t>(policy.rows()) != model.num_states() ||
      static_cast<std::size_t>(policy.cols()) != model.num_actions())
    throw std::invalid_argument("policy matrix has wrong shape");
  for (Eigen::Index s = 0; s < policy.rows(); ++s) {
    check_distribution(std::span<const double>(policy.row(s).data(), static_cast<std::size_t>(policy.cols())),
                       "policy row " + std::to_string(s));
  }
}

PolicyMatrix uniform_policy(const MdpModel& model) {
  const auto S = static_cast<Eigen::Index>(model.num_states());
  const auto A = static_cast<Eigen::Index>(model.num_actions());
  return PolicyMatrix::Constant(S, A, 1.0 / static_cast<double>(A));
}

Trajectory sample_trajectory(const MdpModel& model, const PolicyMatrix& policy,
                             std::size_t horizon, Rng& rng) {
  if (horizon == 0) throw std::invalid_argument("sample_trajectory: horizon must be >= 1");
  const auto A = model.num_actions();
  if (static_cast<std::size_t>(policy.rows()) != model.num_states() || static_cast<std::size_t>(policy.cols()) != A)
    throw std::invalid_argument("sample_trajectory: policy shape does not match the model");
  Trajectory tau;
  tau.steps.resize(horizon);
  std::uint32_t s = model.sample_initial(rng);
  for (std::size_t t = 0; t < horizon; ++t) {
    const double* row = policy.row(s).data();
    const double u = uniform01(rng);
    double cum = 0.0;
    std::uint32_t a = static_cast<std::uint32_t>(A - 1);
    for (std::size_t k = 0; k + 1 < A; ++k) {
      cum += row[k];
      if (u < cum) {
        a = static_cast<std::uint32_t>(k);
        break;
      }
    }
    tau.steps[t] = {s, a};
    if (t + 1 < horizon) s = model.sample_next(s, a, rng);
  }
  return tau;
}

namespace {

// Sparse state-to-state kernel under a policy, stored column-wise by source.
struct StateKernel {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> out;  // out[s] = {(s', P_pi(s'|s))}
};

StateKernel state_kernel(const MdpModel& model, const PolicyMatrix& policy) {
  const auto S = model.num_states();
  StateKernel k;
  k.out.resize(S);
  std::vector<double> row(S);
  for (std::size_t s = 0; s < S; ++s) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t a = 0; a < model.num_actions(); ++a) {
      const double pa = policy(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
      if (pa == 0.0) continue;
      const auto p = model.transition(s, a);
      for (std::size_t n = 0; n < S; ++n) row[n] += pa * p[n];
    }
    for (std::size_t n = 0; n < S; ++n)
      if (row[n] != 0.0) k.out[s].emplace_back(static_cast<std::uint32_t>(n), row[n]);
  }
  return k;
}

Vector push_forward(const StateKernel& k, const Vector& d) {
  Vector next = Vector::Zero(d.size());
  for (Eigen::Index s = 0; s < d.size(); ++s) {
    if (d[s] == 0.0) continue;
    for (const auto& [n, p] : k.out[static_cast<std::size_t>(s)]) next[n] += d[s] * p;
  }
  return next;
}

OccupancyVector spread_over_actions(const MdpModel& model, const PolicyMatrix& policy,
                                    const Vector& state_occ, OccupancyKind kind, std::size_t horizon) {
  OccupancyVector occ;
  occ.kind = kind;
  occ.horizon = horizon;
  occ.entries.resize(static_cast<Eigen::Index>(model.num_pairs()));
  for (std::size_t s = 0; s < model.num_states(); ++s)
    for (std::size_t a = 0; a < model.num_actions(); ++a)
      occ.entries[static_cast<Eigen::Index>(model.index(s, a))] =
          state_occ[static_cast<Eigen::Index>(s)] * policy(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  return occ;
}

Vector initial_vector(const MdpModel& model) {
  const auto xi = model.initial_dist();
  return Eigen::Map<const Vector>(xi.data(), static_cast<Eigen::Index>(xi.size()));
}

Matrix dense_state_kernel(const MdpModel& model, const PolicyMatrix& policy) {
  const auto S = static_cast<Eigen::Index>(model.num_states());
  Matrix P = Matrix::Zero(S, S);
  for (Eigen::Index s = 0; s < S; ++s)
    for (Eigen::Index a = 0; a < policy.cols(); ++a) {
      const double pa = policy(s, a);
      if (pa == 0.0) continue;
      const auto row = model.transition(static_cast<std::size_t>(s), static_cast<std::size_t>(a));
      for (Eigen::Index n = 0; n < S; ++n) P(s, n) += pa * row[static_cast<std::size_t>(n)];
    }
  return P;
}

}  // namespace

OccupancyVector exact_occupancy(const MdpModel& model, const PolicyMatrix& policy, OccupancyMode mode) {
  validate_policy(model, policy);
  const double gamma = model.discount();
  if (const auto* trunc = std::get_if<TruncatedHorizon>(&mode)) {
    const auto k = state_kernel(model, policy);
    Vector d = initial_vector(model);
    Vector acc = Vector::Zero(d.size());
    double w = 1.0;
    for (std::size_t t = 0; t < trunc->horizon; ++t) {
      acc += w * d;
      w *= gamma;
      if (t + 1 < trunc->horizon) d = push_forward(k, d);
    }
    return spread_over_actions(model, policy, acc, OccupancyKind::exact_truncated, trunc->horizon);
  }

  Vector mu;
  if (model.num_pairs() <= 4096) {
    const auto S = static_cast<Eigen::Index>(model.num_states());
    const Matrix P = dense_state_kernel(model, policy);
    const Matrix system = Matrix::Identity(S, S) - gamma * P.transpose();
    Eigen::PartialPivLU<Matrix> lu(system);
    mu = lu.solve(initial_vector(model));
    if (!mu.allFinite()) throw NumericalFailure("exact_occupancy: linear solve produced non-finite values");
    // round-off can leave entries like -1e-18 at unreachable states
    mu = mu.cwiseMax(0.0);
  } else {
    const auto k = state_kernel(model, policy);
    Vector d = initial_vector(model);
    mu = Vector::Zero(d.size());
    double w = 1.0;
    while (w / (1.0 - gamma) >= 1e-12) {
      mu += w * d;
      w *= gamma;
      d = push_forward(k, d);
    }
  }
  return spread_over_actions(model, policy, mu, OccupancyKind::exact_infinite, 0);
}

Vector policy_reward(const MdpModel& model, const PolicyMatrix& policy, std::span<const double> reward) {
  if (reward.size() != model.num_pairs()) throw std::invalid_argument("reward has wrong size");
  Vector r(static_cast<Eigen::Index>(model.num_states()));
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    double v = 0.0;
    for (std::size_t a = 0; a < model.num_actions(); ++a)
      v += policy(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) * reward[model.index(s, a)];
    r[static_cast<Eigen::Index>(s)] = v;
  }
  return r;
}

Vector evaluate_policy(const MdpModel& model, const PolicyMatrix& policy, std::span<const double> reward) {
  validate_policy(model, policy);
  const auto S = static_cast<Eigen::Index>(model.num_states());
  const Matrix P = dense_state_kernel(model, policy);
  const Matrix system = Matrix::Identity(S, S) - model.discount() * P;
  Vector v = Eigen::PartialPivLU<Matrix>(system).solve(policy_reward(model, policy, reward));
  if (!v.allFinite()) throw NumericalFailure("evaluate_policy: linear solve produced non-finite values");
  return v;
}

ValueIterationResult value_iteration(const MdpModel& model, std::span<const double> reward, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
  if (reward.size() != model.num_pairs()) throw std::invalid_argument("value_iteration: reward has wrong size");
  for (double r : reward)
    if (!std::isfinite(r)) throw std::invalid_argument("value_iteration: non-finite reward");

  const auto S = model.num_states();
  const auto A = model.num_actions();
  const double gamma = model.discount();
  const double threshold = tol * (1.0 - gamma) / gamma;

  ValueIterationResult result;
  Vector v = Vector::Zero(static_cast<Eigen::Index>(S));
  Vector next(static_cast<Eigen::Index>(S));
  std::vector<std::size_t> argmax(S, 0);
  for (;;) {
    ++result.iterations;
    double change = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < A; ++a) {
        double q = reward[model.index(s, a)];
        const auto row = model.transition(s, a);
        double ev = 0.0;
        for (std::size_t n = 0; n < S; ++n) ev += row[n] * v[static_cast<Eigen::Index>(n)];
        q += gamma * ev;
        if (q > best) {
          best = q;
          argmax[s] = a;
        }
      }
      next[static_cast<Eigen::Index>(s)] = best;
      change = std::max(change, std::abs(best - v[static_cast<Eigen::Index>(s)]));
    }
    v.swap(next);
    if (change < threshold) break;
  }
  result.values = v;
  result.optimal_value = initial_vector(model).dot(v);
  result.greedy_policy = PolicyMatrix::Zero(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(A));
  for (std::size_t s = 0; s < S; ++s)
    result.greedy_policy(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(argmax[s])) = 1.0;
  return result;
}

}  // namespace tsivr
