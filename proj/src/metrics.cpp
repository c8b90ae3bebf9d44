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

#include "lucid/metrics.hpp"

#include <json.hpp>

#include "lucid/error.hpp"

namespace lucid {

std::size_t EvalReport::total() const {
  std::size_t n = 0;
  for (const auto& row : confusion)
    for (auto c : row) n += c;
  return n;
}

EvalReport report_from_confusion(const std::vector<std::vector<std::size_t>>& confusion) {
  const std::size_t k = confusion.size();
  for (const auto& row : confusion)
    if (row.size() != k) fail_validation("confusion matrix must be square");
  EvalReport r;
  r.confusion = confusion;
  r.per_class.resize(k);
  std::vector<std::size_t> predicted(k, 0);
  std::size_t total = 0, correct = 0;
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t p = 0; p < k; ++p) {
      predicted[p] += confusion[t][p];
      r.per_class[t].support += confusion[t][p];
    }
    total += r.per_class[t].support;
    correct += confusion[t][t];
  }
  if (total == 0) fail_validation("cannot score an empty evaluation set");

  for (std::size_t c = 0; c < k; ++c) {
    auto& m = r.per_class[c];
    const double tp = static_cast<double>(confusion[c][c]);
    m.precision = predicted[c] ? tp / static_cast<double>(predicted[c]) : 0.0;
    m.recall = m.support ? tp / static_cast<double>(m.support) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    const double w = static_cast<double>(m.support) / static_cast<double>(total);
    r.precision += w * m.precision;
    r.recall += w * m.recall;
    r.f1 += w * m.f1;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return r;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f1"] = report.f1;
  j["num_samples"] = report.total();
  auto& per = j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    per.push_back({{"class", c},
                   {"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1},
                   {"support", m.support}});
  }
  j["confusion"] = report.confusion;
  return j.dump(2) + "\n";
}

}  // namespace lucid
