// ----------------------------------------------------------------------------
// Copyright 2026 The Lucid Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lucid {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// confusion[t][p] counts samples of true class t predicted as p. The four
/// headline numbers are support-weighted averages over classes; a class that
/// is never predicted gets precision 0.
struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<std::size_t>> confusion;

  std::size_t total() const;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

EvalReport report_from_confusion(const std::vector<std::vector<std::size_t>>& confusion);

/// Pretty JSON with the four weighted metrics, per-class table and confusion.
std::string report_to_json(const EvalReport& report);

}  // namespace lucid
