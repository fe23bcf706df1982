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

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace tsivr {

/// %.10g, with NaN written as an empty field.
std::string format_number(double v);

/// Comma-separated rows terminated by a bare LF. Fields are written verbatim,
/// so callers must not pass strings containing commas or newlines.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<const char*> names);
  void row(const std::vector<std::string>& fields);

  CsvWriter& field(const std::string& s);
  CsvWriter& field(double v) { return field(format_number(v)); }
  CsvWriter& field(std::size_t v) { return field(std::to_string(v)); }
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace tsivr
