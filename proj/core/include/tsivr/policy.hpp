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
#include <tsivr/types.hpp>

#include <iosfwd>
#include <memory>
#include <string>

namespace tsivr {

/// Softmax policy parameters theta. Entries must stay finite.
struct PolicyParams {
  Vector theta;

  PolicyParams() = default;
  explicit PolicyParams(Vector v) : theta(std::move(v)) {}
  static PolicyParams zeros(std::size_t dim) { return PolicyParams(Vector::Zero(static_cast<Eigen::Index>(dim))); }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(theta.size()); }
  bool finite() const { return theta.allFinite(); }
};

enum class FeatureKind { tabular, linear };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

/// Logit map psi(s, a; theta) together with its declared Lipschitz constants:
/// ||grad psi|| <= lipschitz_grad_bound() and ||hess psi|| <= lipschitz_hessian_bound().
class FeatureMap {
 public:
  virtual ~FeatureMap() = default;

  virtual FeatureKind kind() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;
  virtual std::size_t num_states() const noexcept = 0;
  virtual std::size_t num_actions() const noexcept = 0;

  virtual double value(std::size_t s, std::size_t a, const PolicyParams& theta) const = 0;
  /// out += scale * grad_theta psi(s, a; theta)
  virtual void add_grad(std::size_t s, std::size_t a, const PolicyParams& theta, double scale,
                        Eigen::Ref<Vector> out) const = 0;

  virtual double lipschitz_grad_bound() const noexcept = 0;
  virtual double lipschitz_hessian_bound() const noexcept = 0;

  Vector grad(std::size_t s, std::size_t a, const PolicyParams& theta) const;
};

/// psi(s, a; theta) = theta[s * |A| + a]. Unit gradient, zero curvature.
class TabularFeatures final : public FeatureMap {
 public:
  TabularFeatures(std::size_t num_states, std::size_t num_actions);

  FeatureKind kind() const noexcept override { return FeatureKind::tabular; }
  std::size_t dim() const noexcept override { return num_states_ * num_actions_; }
  std::size_t num_states() const noexcept override { return num_states_; }
  std::size_t num_actions() const noexcept override { return num_actions_; }
  double value(std::size_t s, std::size_t a, const PolicyParams& theta) const override;
  void add_grad(std::size_t s, std::size_t a, const PolicyParams& theta, double scale,
                Eigen::Ref<Vector> out) const override;
  double lipschitz_grad_bound() const noexcept override { return 1.0; }
  double lipschitz_hessian_bound() const noexcept override { return 0.0; }

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
};

/// psi(s, a; theta) = <phi(s, a), theta> with phi stored as rows of a
/// (|S||A|) x d matrix. The gradient bound is the largest row norm.
class LinearFeatures final : public FeatureMap {
 public:
  LinearFeatures(std::size_t num_states, std::size_t num_actions, Matrix features);

  FeatureKind kind() const noexcept override { return FeatureKind::linear; }
  std::size_t dim() const noexcept override { return static_cast<std::size_t>(features_.cols()); }
  std::size_t num_states() const noexcept override { return num_states_; }
  std::size_t num_actions() const noexcept override { return num_actions_; }
  double value(std::size_t s, std::size_t a, const PolicyParams& theta) const override;
  void add_grad(std::size_t s, std::size_t a, const PolicyParams& theta, double scale,
                Eigen::Ref<Vector> out) const override;
  double lipschitz_grad_bound() const noexcept override { return grad_bound_; }
  double lipschitz_hessian_bound() const noexcept override { return 0.0; }

  const Matrix& features() const noexcept { return features_; }

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  Matrix features_;
  double grad_bound_;
};

/// pi(. | s) proportional to exp(psi(s, .; theta)), max-shifted.
Vector action_probs(const FeatureMap& fm, const PolicyParams& theta, std::size_t s);

/// grad_theta log pi(a | s) = grad psi(s, a) - sum_a' pi(a' | s) grad psi(s, a').
Vector log_policy_grad(const FeatureMap& fm, const PolicyParams& theta, std::size_t s, std::size_t a);

/// Policy probabilities and log-probabilities for every state, evaluated once
/// per parameter vector and shared by the samplers and estimators.
struct EvaluatedPolicy {
  PolicyMatrix probs;
  PolicyMatrix log_probs;

  static EvaluatedPolicy evaluate(const FeatureMap& fm, const PolicyParams& theta);
};

/// out += scale * grad_theta log pi(a | s), using cached probabilities for state s.
void add_log_policy_grad(const FeatureMap& fm, const PolicyParams& theta, const EvaluatedPolicy& pol,
                         std::size_t s, std::size_t a, double scale, Eigen::Ref<Vector> out);

/// Parameter file:
///
///   tsivr-policy 1
///   feature_map tabular
///   dim 256
///   <one %.17g value per line>
struct PolicyFile {
  FeatureKind kind = FeatureKind::tabular;
  PolicyParams params;
};

void write_params(std::ostream& out, FeatureKind kind, const PolicyParams& params);
PolicyFile read_params(std::istream& in);
void save_params(const std::string& path, FeatureKind kind, const PolicyParams& params);
PolicyFile load_params(const std::string& path);

}  // namespace tsivr
