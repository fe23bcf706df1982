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
#include <tsivr/csv.hpp>
#include <tsivr/trace.hpp>

#include <cmath>
#include <cstdio>

namespace tsivr {

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void CsvWriter::header(std::initializer_list<const char*> names) {
  for (const char* n : names) field(std::string(n));
  end_row();
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (const auto& f : fields) field(f);
  end_row();
}

CsvWriter& CsvWriter::field(const std::string& s) {
  if (!first_) out_ << ',';
  out_ << s;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

const std::vector<const char*>& RunTrace::csv_columns() {
  static const std::vector<const char*> cols = {
      "epoch",      "inner",        "trajectories", "samples",      "step_norm",
      "truncated",  "grad_norm",    "lambda_l1",    "utility_estimate", "max_weight",
      "weight_bound", "batch_return", "exact_objective"};
  return cols;
}

void RunTrace::write_csv(std::ostream& out) const {
  CsvWriter csv(out);
  for (const char* c : csv_columns()) csv.field(std::string(c));
  csv.end_row();
  for (const auto& r : iterations) {
    csv.field(r.epoch).field(r.inner).field(r.trajectories).field(r.samples).field(r.step_norm);
    csv.field(std::string(r.truncated ? "1" : "0"));
    csv.field(r.grad_norm).field(r.lambda_l1).field(r.utility_estimate).field(r.max_weight).field(r.weight_bound);
    csv.field(r.batch_return).field(r.exact_objective);
    csv.end_row();
  }
}

}  // namespace tsivr
