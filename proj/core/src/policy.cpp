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
#include <tsivr/policy.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tsivr {

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::tabular: return "tabular";
    case FeatureKind::linear: return "linear";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "tabular") return FeatureKind::tabular;
  if (name == "linear") return FeatureKind::linear;
  throw std::invalid_argument("unknown feature map kind: " + name);
}

Vector FeatureMap::grad(std::size_t s, std::size_t a, const PolicyParams& theta) const {
  Vector g = Vector::Zero(static_cast<Eigen::Index>(dim()));
  add_grad(s, a, theta, 1.0, g);
  return g;
}

TabularFeatures::TabularFeatures(std::size_t num_states, std::size_t num_actions)
    : num_states_(num_states), num_actions_(num_actions) {
  if (num_states == 0 || num_actions == 0) throw std::invalid_argument("TabularFeatures: empty space");
}

double TabularFeatures::value(std::size_t s, std::size_t a, const PolicyParams& theta) const {
  return theta.theta[static_cast<Eigen::Index>(s * num_actions_ + a)];
}

void TabularFeatures::add_grad(std::size_t s, std::size_t a, const PolicyParams&, double scale,
                               Eigen::Ref<Vector> out) const {
  out[static_cast<Eigen::Index>(s * num_actions_ + a)] += scale;
}

LinearFeatures::LinearFeatures(std::size_t num_states, std::size_t num_actions, Matrix features)
    : num_states_(num_states), num_actions_(num_actions), features_(std::move(features)) {
  if (static_cast<std::size_t>(features_.rows()) != num_states * num_actions || features_.cols() == 0)
    throw std::invalid_argument("LinearFeatures: feature matrix must be (|S||A|) x d with d >= 1");
  if (!features_.allFinite()) throw std::invalid_argument("LinearFeatures: non-finite feature");
  grad_bound_ = features_.rowwise().norm().maxCoeff();
}

double LinearFeatures::value(std::size_t s, std::size_t a, const PolicyParams& theta) const {
  return features_.row(static_cast<Eigen::Index>(s * num_actions_ + a)).dot(theta.theta);
}

void LinearFeatures::add_grad(std::size_t s, std::size_t a, const PolicyParams&, double scale,
                              Eigen::Ref<Vector> out) const {
  out += scale * features_.row(static_cast<Eigen::Index>(s * num_actions_ + a)).transpose();
}

Vector action_probs(const FeatureMap& fm, const PolicyParams& theta, std::size_t s) {
  const auto A = fm.num_actions();
  Vector logits(static_cast<Eigen::Index>(A));
  for (std::size_t a = 0; a < A; ++a) logits[static_cast<Eigen::Index>(a)] = fm.value(s, a, theta);
  const double shift = logits.maxCoeff();
  Vector p = (logits.array() - shift).exp().matrix();
  return p / p.sum();
}

Vector log_policy_grad(const FeatureMap& fm, const PolicyParams& theta, std::size_t s, std::size_t a) {
  const Vector p = action_probs(fm, theta, s);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(fm.dim()));
  fm.add_grad(s, a, theta, 1.0, g);
  for (std::size_t b = 0; b < fm.num_actions(); ++b) fm.add_grad(s, b, theta, -p[static_cast<Eigen::Index>(b)], g);
  return g;
}

EvaluatedPolicy EvaluatedPolicy::evaluate(const FeatureMap& fm, const PolicyParams& theta) {
  if (theta.dim() != fm.dim()) throw std::invalid_argument("policy parameters do not match feature dimension");
  const auto S = static_cast<Eigen::Index>(fm.num_states());
  const auto A = static_cast<Eigen::Index>(fm.num_actions());
  EvaluatedPolicy pol;
  pol.probs.resize(S, A);
  pol.log_probs.resize(S, A);
  Vector logits(A);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index a = 0; a < A; ++a)
      logits[a] = fm.value(static_cast<std::size_t>(s), static_cast<std::size_t>(a), theta);
    const double shift = logits.maxCoeff();
    const Vector shifted = logits.array() - shift;
    const double log_z = std::log(shifted.array().exp().sum());
    for (Eigen::Index a = 0; a < A; ++a) {
      pol.log_probs(s, a) = shifted[a] - log_z;
      pol.probs(s, a) = std::exp(pol.log_probs(s, a));
    }
    // renormalize so each row sums to 1 within rounding
    pol.probs.row(s) /= pol.probs.row(s).sum();
  }
  return pol;
}

void add_log_policy_grad(const FeatureMap& fm, const PolicyParams& theta, const EvaluatedPolicy& pol,
                         std::size_t s, std::size_t a, double scale, Eigen::Ref<Vector> out) {
  fm.add_grad(s, a, theta, scale, out);
  for (std::size_t b = 0; b < fm.num_actions(); ++b)
    fm.add_grad(s, b, theta, -scale * pol.probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(b)), out);
}

void write_params(std::ostream& out, FeatureKind kind, const PolicyParams& params) {
  out << "tsivr-policy 1\nfeature_map " << to_string(kind) << "\ndim " << params.dim() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < params.theta.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", params.theta[i]);
    out << buf << '\n';
  }
}

PolicyFile read_params(std::istream& in) {
  std::string tag, key, kind_name;
  int version = 0;
  std::size_t line = 1;
  if (!(in >> tag >> version) || tag != "tsivr-policy") throw ParseError("missing 'tsivr-policy' header", line);
  if (version != 1) throw ParseError("unsupported policy file version " + std::to_string(version), line);
  ++line;
  if (!(in >> key >> kind_name) || key != "feature_map") throw ParseError("expected 'feature_map <kind>'", line);
  PolicyFile file;
  try {
    file.kind = feature_kind_from_string(kind_name);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line);
  }
  ++line;
  long long dim = 0;
  if (!(in >> key >> dim) || key != "dim" || dim <= 0) throw ParseError("expected 'dim <positive>'", line);
  file.params = PolicyParams::zeros(static_cast<std::size_t>(dim));
  for (long long i = 0; i < dim; ++i) {
    ++line;
    double v = 0.0;
    if (!(in >> v)) throw ParseError("expected parameter value", line);
    if (!std::isfinite(v)) throw ParseError("non-finite parameter value", line);
    file.params.theta[static_cast<Eigen::Index>(i)] = v;
  }
  std::string extra;
  if (in >> extra) throw ParseError("trailing data after parameters", line + 1);
  return file;
}

void save_params(const std::string& path, FeatureKind kind, const PolicyParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write parameter file: " + path);
  write_params(out, kind, params);
}

PolicyFile load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open parameter file: " + path);
  return read_params(in);
}

}  // namespace tsivr
