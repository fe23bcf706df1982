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
#include <tsivr/utilities.hpp>

#include <cmath>

namespace tsivr {
namespace {

Eigen::Map<const Vector> view(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

void require_size(std::span<const double> lambda, std::size_t n, const char* who) {
  if (lambda.size() != n) throw std::invalid_argument(std::string(who) + ": occupancy vector has wrong size");
}

class LinearUtility final : public Utility {
 public:
  explicit LinearUtility(Vector r) : r_(std::move(r)) {
    if (!r_.allFinite()) throw std::invalid_argument("linear_utility: non-finite reward");
    constants_.grad_inf_bound = r_.size() ? r_.cwiseAbs().maxCoeff() : 0.0;
  }
  std::string name() const override { return "linear"; }
  double value(std::span<const double> lambda) const override {
    require_size(lambda, static_cast<std::size_t>(r_.size()), "linear_utility");
    return r_.dot(view(lambda));
  }
  Vector grad(std::span<const double> lambda) const override {
    require_size(lambda, static_cast<std::size_t>(r_.size()), "linear_utility");
    return r_;
  }
  bool is_concave() const noexcept override { return true; }
  bool is_linear() const noexcept override { return true; }
  UtilityConstants constants() const noexcept override { return constants_; }

 private:
  Vector r_;
  UtilityConstants constants_;
};

class EntropyUtility final : public Utility {
 public:
  EntropyUtility(std::size_t S, std::size_t A, double gamma, double floor)
      : S_(S), A_(A), gamma_(gamma), floor_(floor) {
    if (!(floor > 0.0)) throw std::invalid_argument("entropy_utility: floor must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("entropy_utility: gamma must lie in (0, 1)");
    // mu(s) ranges over [0, 1] for valid occupancies; h(mu) = log(mu + f) + mu / (mu + f)
    // runs from log f up to log(1 + f) + 1 / (1 + f), and h' <= 2 / f.
    const double c = 1.0 - gamma;
    const double h_range = std::max(-std::log(floor), std::log1p(floor) + 1.0 / (1.0 + floor));
    constants_.grad_inf_bound = c * h_range;
    constants_.smoothness_l1 = c * c * 2.0 / floor;
    constants_.smoothness_l2 = constants_.smoothness_l1 * std::sqrt(static_cast<double>(A));
  }
  std::string name() const override { return "entropy"; }
  double value(std::span<const double> lambda) const override {
    require_size(lambda, S_ * A_, "entropy_utility");
    double v = 0.0;
    for (std::size_t s = 0; s < S_; ++s) {
      const double mu = marginal(lambda, s);
      v -= mu * std::log(mu + floor_);
    }
    return v;
  }
  Vector grad(std::span<const double> lambda) const override {
    require_size(lambda, S_ * A_, "entropy_utility");
    Vector g(static_cast<Eigen::Index>(S_ * A_));
    for (std::size_t s = 0; s < S_; ++s) {
      const double mu = marginal(lambda, s);
      const double gs = -(1.0 - gamma_) * (std::log(mu + floor_) + mu / (mu + floor_));
      g.segment(static_cast<Eigen::Index>(s * A_), static_cast<Eigen::Index>(A_)).setConstant(gs);
    }
    return g;
  }
  bool is_concave() const noexcept override { return true; }
  UtilityConstants constants() const noexcept override { return constants_; }

 private:
  double marginal(std::span<const double> lambda, std::size_t s) const {
    double x = 0.0;
    for (std::size_t a = 0; a < A_; ++a) x += lambda[s * A_ + a];
    return (1.0 - gamma_) * x;
  }

  std::size_t S_, A_;
  double gamma_, floor_;
  UtilityConstants constants_;
};

class LogBarrierUtility final : public Utility {
 public:
  LogBarrierUtility(std::size_t S, std::size_t A, double sigma) : S_(S), A_(A), sigma_(sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("log_barrier_utility: sigma must be positive");
    constants_.grad_inf_bound = 1.0 / sigma;
    constants_.smoothness_l1 = 1.0 / (sigma * sigma);
    constants_.smoothness_l2 = std::sqrt(static_cast<double>(A)) / (sigma * sigma);
  }
  std::string name() const override { return "log_barrier"; }
  double value(std::span<const double> lambda) const override {
    require_size(lambda, S_ * A_, "log_barrier_utility");
    double v = 0.0;
    for (std::size_t s = 0; s < S_; ++s) v += std::log(state_mass(lambda, s) + sigma_);
    return v;
  }
  Vector grad(std::span<const double> lambda) const override {
    require_size(lambda, S_ * A_, "log_barrier_utility");
    Vector g(static_cast<Eigen::Index>(S_ * A_));
    for (std::size_t s = 0; s < S_; ++s)
      g.segment(static_cast<Eigen::Index>(s * A_), static_cast<Eigen::Index>(A_))
          .setConstant(1.0 / (state_mass(lambda, s) + sigma_));
    return g;
  }
  bool is_concave() const noexcept override { return true; }
  UtilityConstants constants() const noexcept override { return constants_; }

 private:
  double state_mass(std::span<const double> lambda, std::size_t s) const {
    double x = 0.0;
    for (std::size_t a = 0; a < A_; ++a) x += lambda[s * A_ + a];
    return x;
  }

  std::size_t S_, A_;
  double sigma_;
  UtilityConstants constants_;
};

class SetDistanceUtility final : public Utility {
 public:
  SetDistanceUtility(Matrix M, ConvexSet set, double l1_bound) : M_(std::move(M)), set_(std::move(set)) {
    if (M_.rows() == 0 || M_.cols() == 0 || !M_.allFinite())
      throw std::invalid_argument("set_distance_utility: feedback matrix must be nonempty and finite");
    Vector anchor;
    if (const auto* box = std::get_if<BoxSet>(&set_)) {
      if (box->lower.size() != M_.rows() || box->upper.size() != M_.rows())
        throw std::invalid_argument("set_distance_utility: box bounds do not match feedback rows");
      if (!box->lower.allFinite() || !box->upper.allFinite() || (box->lower.array() > box->upper.array()).any())
        throw std::invalid_argument("set_distance_utility: box must have finite bounds with lower <= upper");
      anchor = 0.5 * (box->lower + box->upper);
    } else {
      const auto& ball = std::get<BallSet>(set_);
      if (ball.center.size() != M_.rows()) throw std::invalid_argument("set_distance_utility: ball center size");
      if (!(ball.radius >= 0.0) || !ball.center.allFinite())
        throw std::invalid_argument("set_distance_utility: ball radius must be >= 0");
      anchor = ball.center;
    }
    if (!(l1_bound > 0.0)) throw std::invalid_argument("set_distance_utility: occupancy bound must be positive");
    // ||P(u) - u|| <= ||u - anchor|| <= maxcol * ||lambda||_1 + ||anchor||
    const double maxcol = M_.colwise().norm().maxCoeff();
    const double spectral = Eigen::JacobiSVD<Matrix>(M_).singularValues()[0];
    constants_.grad_inf_bound = 2.0 * maxcol * (maxcol * l1_bound + anchor.norm());
    constants_.smoothness_l1 = 2.0 * maxcol * maxcol;
    constants_.smoothness_l2 = 2.0 * maxcol * spectral;
  }
  std::string name() const override { return "set_distance"; }
  double value(std::span<const double> lambda) const override {
    const Vector u = feedback(lambda);
    return -(project(set_, u) - u).squaredNorm();
  }
  Vector grad(std::span<const double> lambda) const override {
    const Vector u = feedback(lambda);
    return 2.0 * M_.transpose() * (project(set_, u) - u);
  }
  bool is_concave() const noexcept override { return true; }
  UtilityConstants constants() const noexcept override { return constants_; }

 private:
  Vector feedback(std::span<const double> lambda) const {
    require_size(lambda, static_cast<std::size_t>(M_.cols()), "set_distance_utility");
    return M_ * view(lambda);
  }

  Matrix M_;
  ConvexSet set_;
  UtilityConstants constants_;
};

}  // namespace

Vector project(const ConvexSet& set, const Vector& u) {
  if (const auto* box = std::get_if<BoxSet>(&set)) {
    if (box->lower.size() != u.size() || box->upper.size() != u.size())
      throw std::invalid_argument("project: box dimension mismatch");
    if ((box->lower.array() > box->upper.array()).any()) throw std::invalid_argument("project: empty box");
    return u.cwiseMax(box->lower).cwiseMin(box->upper);
  }
  const auto& ball = std::get<BallSet>(set);
  if (ball.center.size() != u.size()) throw std::invalid_argument("project: ball dimension mismatch");
  if (!(ball.radius >= 0.0)) throw std::invalid_argument("project: negative radius");
  const Vector d = u - ball.center;
  const double n = d.norm();
  if (n <= ball.radius) return u;
  return ball.center + (ball.radius / n) * d;
}

UtilityPtr linear_utility(Vector reward) { return std::make_shared<LinearUtility>(std::move(reward)); }

UtilityPtr entropy_utility(std::size_t num_states, std::size_t num_actions, double gamma, double floor) {
  return std::make_shared<EntropyUtility>(num_states, num_actions, gamma, floor);
}

UtilityPtr log_barrier_utility(std::size_t num_states, std::size_t num_actions, double sigma) {
  return std::make_shared<LogBarrierUtility>(num_states, num_actions, sigma);
}

UtilityPtr set_distance_utility(Matrix feedback, ConvexSet set, double occupancy_l1_bound) {
  return std::make_shared<SetDistanceUtility>(std::move(feedback), std::move(set), occupancy_l1_bound);
}

}  // namespace tsivr
