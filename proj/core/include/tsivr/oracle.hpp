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

#include <tsivr/mdp.hpp>
#include <tsivr/policy.hpp>
#include <tsivr/utilities.hpp>

#include <functional>

namespace tsivr {

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

/// Every positive-probability length-H trajectory with its exact probability.
struct EnumerationTable {
  struct Entry {
    Trajectory trajectory;
    double probability;
  };
  std::vector<Entry> entries;
  std::size_t horizon = 0;

  double total_probability() const;
};

/// Depth-first expansion of initial x policy x kernel. Throws SizeLimitError
/// when (|S||A|)^H exceeds cap.
EnumerationTable enumerate(const MdpModel& model, const PolicyMatrix& policy, std::size_t horizon,
                           std::size_t cap = kDefaultEnumerationCap);

using TrajectoryFunction = std::function<Vector(const Trajectory&)>;

/// sum_tau p(tau) f(tau).
Vector exact_expectation(const EnumerationTable& table, const TrajectoryFunction& f);

/// Central differences of a scalar function, step h per coordinate.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                                  double step = 1e-5);

/// [grad_theta lambda_H(theta)]^T r by backward recursion over truncated
/// Q-functions: sum_t gamma^t sum_{s,a} d_t(s) pi(a|s) Q_{H-t}(s,a) grad log pi(a|s).
/// Exact for any model size, no sampling and no enumeration.
Vector truncated_jacobian_product(const MdpModel& model, const FeatureMap& fm, const PolicyParams& theta,
                                  std::span<const double> r, std::size_t horizon);

enum class GradientMethod { enumeration, finite_difference, recursion };

/// grad_theta F(lambda_H(theta)).
///  - enumeration: exact expectation of the on-policy estimator with r = grad F(lambda_H(theta));
///  - finite_difference: central differences (step 1e-5) of F(exact truncated occupancy);
///  - recursion: truncated_jacobian_product with r = grad F(lambda_H(theta)).
Vector exact_policy_gradient(const MdpModel& model, const FeatureMap& fm, const PolicyParams& theta,
                             const Utility& utility, std::size_t horizon,
                             GradientMethod method = GradientMethod::enumeration,
                             std::size_t cap = kDefaultEnumerationCap);

/// F(lambda(theta)) on the exact occupancy (infinite horizon unless a horizon is given).
double exact_objective(const MdpModel& model, const FeatureMap& fm, const PolicyParams& theta,
                       const Utility& utility, std::size_t horizon = 0);

}  // namespace tsivr
