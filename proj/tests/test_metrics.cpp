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

#include <random>

#include <gtest/gtest.h>

#include "lucid/error.hpp"
#include "lucid/metrics.hpp"

namespace lucid {
namespace {

using Confusion = std::vector<std::vector<std::size_t>>;

// Oracle over raw (truth, prediction) pairs, sharing no code with the library.
struct Oracle {
  double accuracy, precision, recall, f1;
};

Oracle oracle(const std::vector<std::pair<int, int>>& pairs, int classes) {
  Oracle o{0, 0, 0, 0};
  int correct = 0;
  for (auto [t, p] : pairs) correct += t == p;
  o.accuracy = static_cast<double>(correct) / static_cast<double>(pairs.size());
  for (int c = 0; c < classes; ++c) {
    int tp = 0, predicted = 0, actual = 0;
    for (auto [t, p] : pairs) {
      tp += t == c && p == c;
      predicted += p == c;
      actual += t == c;
    }
    const double prec = predicted ? static_cast<double>(tp) / predicted : 0.0;
    const double rec = actual ? static_cast<double>(tp) / actual : 0.0;
    const double f = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    const double w = static_cast<double>(actual) / static_cast<double>(pairs.size());
    o.precision += w * prec;
    o.recall += w * rec;
    o.f1 += w * f;
  }
  return o;
}

TEST(Metrics, ConstantPredictorOnBalancedBinary) {
  auto r = report_from_confusion(Confusion{{5, 0}, {5, 0}});
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.precision, 0.25);
  EXPECT_DOUBLE_EQ(r.f1, 1.0 / 3.0);
  EXPECT_EQ(r.total(), 10u);
}

TEST(Metrics, PerfectClassifier) {
  auto r = report_from_confusion(Confusion{{3, 0, 0}, {0, 7, 0}, {0, 0, 1}});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(Metrics, SingleCorrectSample) {
  auto r = report_from_confusion(Confusion{{0, 0}, {0, 1}});
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(Metrics, MatchesBruteForceOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int classes = 2 + trial % 4;
    const int n = 1 + static_cast<int>(rng() % 60);
    std::uniform_int_distribution<int> cls(0, classes - 1);
    std::vector<std::pair<int, int>> pairs;
    Confusion m(classes, std::vector<std::size_t>(classes, 0));
    for (int i = 0; i < n; ++i) {
      // Bias towards the diagonal so every regime shows up.
      const int t = cls(rng);
      const int p = rng() % 3 == 0 ? t : cls(rng);
      pairs.emplace_back(t, p);
      ++m[t][p];
    }
    const auto r = report_from_confusion(m);
    const auto o = oracle(pairs, classes);
    ASSERT_NEAR(r.accuracy, o.accuracy, 1e-12);
    ASSERT_NEAR(r.precision, o.precision, 1e-12);
    ASSERT_NEAR(r.recall, o.recall, 1e-12);
    ASSERT_NEAR(r.f1, o.f1, 1e-12);
  }
}

TEST(Metrics, JsonHasHeadlineNumbers) {
  const auto json = report_to_json(report_from_confusion(Confusion{{2, 1}, {0, 3}}));
  for (const char* key : {"\"accuracy\"", "\"precision\"", "\"recall\"", "\"f1\""})
    EXPECT_NE(json.find(key), std::string::npos) << key;
}

TEST(Metrics, RejectsEmptyOrRaggedConfusion) {
  EXPECT_THROW(report_from_confusion(Confusion{}), Error);
  EXPECT_THROW(report_from_confusion(Confusion{{1, 0}, {1}}), Error);
  EXPECT_THROW(report_from_confusion(Confusion{{0, 0}, {0, 0}}), Error);
}

}  // namespace
}  // namespace lucid
