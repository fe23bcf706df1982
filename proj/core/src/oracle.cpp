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
#include <tsivr/estimators.hpp>
#include <tsivr/oracle.hpp>

#include <cmath>

namespace tsivr {

double EnumerationTable::total_probability() const {
  double p = 0.0;
  for (const auto& e : entries) p += e.probability;
  return p;
}

EnumerationTable enumerate(const MdpModel& model, const PolicyMatrix& policy, std::size_t horizon,
                           std::size_t cap) {
  validate_policy(model, policy);
  if (horizon == 0) throw std::invalid_argument("enumerate: horizon must be >= 1");
  const double branching = static_cast<double>(model.num_pairs());
  if (std::pow(branching, static_cast<double>(horizon)) > static_cast<double>(cap))
    throw SizeLimitError("enumerate: (|S||A|)^H = " + std::to_string(model.num_pairs()) + "^" +
                         std::to_string(horizon) + " exceeds cap " + std::to_string(cap));

  EnumerationTable table;
  table.horizon = horizon;
  Trajectory prefix;
  prefix.steps.reserve(horizon);

  const auto S = model.num_states();
  const auto A = model.num_actions();
  std::function<void(std::size_t, double)> expand = [&](std::size_t s, double prob) {
    for (std::size_t a = 0; a < A; ++a) {
      const double pa = policy(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
      if (pa == 0.0) continue;
      prefix.steps.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(a)});
      const double p = prob * pa;
      if (prefix.steps.size() == horizon) {
        table.entries.push_back({prefix, p});
      } else {
        const auto row = model.transition(s, a);
        for (std::size_t n = 0; n < S; ++n)
          if (row[n] > 0.0) expand(n, p * row[n]);
      }
      prefix.steps.pop_back();
    }
  };
  const auto xi = model.initial_dist();
  for (std::size_t s = 0; s < S; ++s)
    if (xi[s] > 0.0) expand(s, xi[s]);
  return table;
}

Vector exact_expectation(const EnumerationTable& table, const TrajectoryFunction& f) {
  if (table.entries.empty()) throw std::invalid_argument("exact_expectation: empty table");
  Vector acc = table.entries.front().probability * f(table.entries.front().trajectory);
  for (std::size_t i = 1; i < table.entries.size(); ++i)
    acc += table.entries[i].probability * f(table.entries[i].trajectory);
  return acc;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double step) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

Vector truncated_jacobian_product(const MdpModel& model, const FeatureMap& fm, const PolicyParams& theta,
                                  std::span<const double> r, std::size_t horizon) {
  if (r.size() != model.num_pairs()) throw std::invalid_argument("truncated_jacobian_product: r has wrong size");
  if (horizon == 0) throw std::invalid_argument("truncated_jacobian_product: horizon must be >= 1");
  const auto S = model.num_states();
  const auto A = model.num_actions();
  const double gamma = model.discount();
  const auto pol = EvaluatedPolicy::evaluate(fm, theta);

  // forward state distributions d_0 .. d_{H-1}
  std::vector<Vector> dist(horizon);
  dist[0] = Eigen::Map<const Vector>(model.initial_dist().data(), static_cast<Eigen::Index>(S));
  for (std::size_t t = 1; t < horizon; ++t) {
    Vector next = Vector::Zero(static_cast<Eigen::Index>(S));
    const Vector& d = dist[t - 1];
    for (std::size_t s = 0; s < S; ++s) {
      if (d[static_cast<Eigen::Index>(s)] == 0.0) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const double w = d[static_cast<Eigen::Index>(s)] * pol.probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
        if (w == 0.0) continue;
        const auto row = model.transition(s, a);
        for (std::size_t n = 0; n < S; ++n) next[static_cast<Eigen::Index>(n)] += w * row[n];
      }
    }
    dist[t] = std::move(next);
  }

  // backward: V_k is the k-step truncated value, Q_k(s,a) = r(s,a) + gamma P V_{k-1}
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(fm.dim()));
  Vector v = Vector::Zero(static_cast<Eigen::Index>(S));
  Vector q(static_cast<Eigen::Index>(S * A));
  double discount_t = std::pow(gamma, static_cast<double>(horizon - 1));
  for (std::size_t t = horizon; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t a = 0; a < A; ++a) {
        const auto row = model.transition(s, a);
        double ev = 0.0;
        for (std::size_t n = 0; n < S; ++n) ev += row[n] * v[static_cast<Eigen::Index>(n)];
        q[static_cast<Eigen::Index>(s * A + a)] = r[s * A + a] + gamma * ev;
      }
    const Vector& d = dist[t];
    for (std::size_t s = 0; s < S; ++s) {
      const double ds = d[static_cast<Eigen::Index>(s)];
      if (ds == 0.0) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const double w = discount_t * ds * pol.probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) *
                         q[static_cast<Eigen::Index>(s * A + a)];
        if (w != 0.0) add_log_policy_grad(fm, theta, pol, s, a, w, grad);
      }
    }
    for (std::size_t s = 0; s < S; ++s) {
      double vs = 0.0;
      for (std::size_t a = 0; a < A; ++a)
        vs += pol.probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) * q[static_cast<Eigen::Index>(s * A + a)];
      v[static_cast<Eigen::Index>(s)] = vs;
    }
    discount_t /= gamma;
  }
  return grad;
}

namespace {

OccupancyVector truncated_occupancy(const MdpModel& model, const FeatureMap& fm, const PolicyParams& theta,
                                    std::size_t horizon) {
  const auto pol = EvaluatedPolicy::evaluate(fm, theta);
  return exact_occupancy(model, pol.probs, TruncatedHorizon{horizon});
}

}  // namespace

Vector exact_policy_gradient(const MdpModel& model, const FeatureMap& fm, const PolicyParams& theta,
                             const Utility& utility, std::size_t horizon, GradientMethod method, std::size_t cap) {
  if (horizon == 0) throw std::invalid_argument("exact_policy_gradient: horizon must be >= 1");
  if (method == GradientMethod::finite_difference) {
    return finite_difference_gradient(
        [&](const Vector& x) { return utility.value(truncated_occupancy(model, fm, PolicyParams(x), horizon).entries); },
        theta.theta, 1e-5);
  }
  const Vector r = utility.grad(truncated_occupancy(model, fm, theta, horizon).entries);
  if (method == GradientMethod::recursion) return truncated_jacobian_product(model, fm, theta, as_span(r), horizon);

  const auto pol = EvaluatedPolicy::evaluate(fm, theta);
  const auto table = enumerate(model, pol.probs, horizon, cap);
  return exact_expectation(table, [&](const Trajectory& tau) {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(fm.dim()));
    accumulate_pg(tau, nullptr, fm, theta, pol, as_span(r), model.discount(), 1.0, g);
    return g;
  });
}

double exact_objective(const MdpModel& model, const FeatureMap& fm, const PolicyParams& theta,
                       const Utility& utility, std::size_t horizon) {
  const auto pol = EvaluatedPolicy::evaluate(fm, theta);
  const OccupancyMode mode = horizon == 0 ? OccupancyMode{InfiniteHorizon{}} : OccupancyMode{TruncatedHorizon{horizon}};
  return utility.value(exact_occupancy(model, pol.probs, mode).entries);
}

}  // namespace tsivr
