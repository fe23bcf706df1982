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

#include <tsivr/policy.hpp>

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <vector>

namespace tsivr {

struct EpisodeReturn {
  double discounted = 0.0;
  double undiscounted = 0.0;
};

/// One optimizer iteration. Every field is a deterministic function of the
/// configuration and seed.
struct IterationRecord {
  std::size_t epoch = 0;
  std::size_t inner = 0;
  std::size_t trajectories = 0;  // cumulative
  std::size_t samples = 0;       // cumulative state-action samples
  double step_norm = 0.0;
  bool truncated = false;
  double grad_norm = 0.0;
  double lambda_l1 = 0.0;
  double utility_estimate = 0.0;  // F at the running occupancy estimate
  double max_weight = 1.0;        // largest importance weight in the batch
  double weight_bound = 1.0;      // exp(2 H l_psi ||theta_j - theta_{j-1}||)
  double batch_return = std::numeric_limits<double>::quiet_NaN();
  double exact_objective = std::numeric_limits<double>::quiet_NaN();
};

struct RunTrace {
  std::vector<IterationRecord> iterations;
  std::vector<EpisodeReturn> episodes;  // in sampling order; empty without a reward table
  double wall_seconds = 0.0;            // not part of write_csv

  /// One row per iteration; stable header and column order.
  void write_csv(std::ostream& out) const;
  static const std::vector<const char*>& csv_columns();
};

struct RunResult {
  PolicyParams final_params;
  RunTrace trace;
};

}  // namespace tsivr
