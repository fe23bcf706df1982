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
#pragma once

#include <tsivr/types.hpp>

#include <memory>
#include <span>
#include <string>
#include <variant>

namespace tsivr {

/// Declared regularity of a utility over valid occupancy vectors:
/// ||grad F||_inf <= grad_inf_bound,
/// ||grad F(x) - grad F(y)||_inf <= smoothness_l2 * ||x - y||_2
///                              and <= smoothness_l1 * ||x - y||_1.
struct UtilityConstants {
  double grad_inf_bound = 0.0;  // l_{lambda,inf}
  double smoothness_l2 = 0.0;   // L_lambda
  double smoothness_l1 = 0.0;   // L_{lambda,inf}
};

/// Utility F(lambda) of the state-action occupancy measure.
class Utility {
 public:
  virtual ~Utility() = default;

  virtual std::string name() const = 0;
  virtual double value(std::span<const double> lambda) const = 0;
  virtual Vector grad(std::span<const double> lambda) const = 0;
  virtual bool is_concave() const noexcept = 0;
  virtual UtilityConstants constants() const noexcept = 0;
  /// True when grad does not depend on lambda.
  virtual bool is_linear() const noexcept { return false; }

  double value(const Vector& lambda) const { return value(std::span<const double>(lambda.data(), size(lambda))); }
  Vector grad(const Vector& lambda) const { return grad(std::span<const double>(lambda.data(), size(lambda))); }

 private:
  static std::size_t size(const Vector& v) { return static_cast<std::size_t>(v.size()); }
};

using UtilityPtr = std::shared_ptr<const Utility>;

/// F(lambda) = <r, lambda>.
UtilityPtr linear_utility(Vector reward);

/// F(lambda) = -sum_s mu(s) log(mu(s) + floor), mu(s) = (1 - gamma) sum_a lambda(s, a).
/// The floor keeps the gradient bounded at unvisited states.
UtilityPtr entropy_utility(std::size_t num_states, std::size_t num_actions, double gamma,
                           double floor = 1e-8);

inline constexpr double kDefaultBarrierSigma = 0.125;

/// F(lambda) = sum_s log(sum_a lambda(s, a) + sigma).
UtilityPtr log_barrier_utility(std::size_t num_states, std::size_t num_actions,
                               double sigma = kDefaultBarrierSigma);

struct BoxSet {
  Vector lower;
  Vector upper;
};
struct BallSet {
  Vector center;
  double radius = 0.0;
};
using ConvexSet = std::variant<BoxSet, BallSet>;

Vector project(const ConvexSet& set, const Vector& u);

/// F(lambda) = -min_{u in U} ||u - M lambda||^2, gradient 2 M^T (Proj_U(M lambda) - M lambda).
/// occupancy_l1_bound (normally 1 / (1 - gamma)) enters the declared gradient bound.
UtilityPtr set_distance_utility(Matrix feedback, ConvexSet set, double occupancy_l1_bound);

}  // namespace tsivr
