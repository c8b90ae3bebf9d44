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

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "lucid/datagen.hpp"
#include "lucid/error.hpp"
#include "lucid/graph.hpp"
#include "test_util.hpp"

namespace lucid {
namespace {

const CategoryId kA(0), kB(1), kC(2);

double dist(const SpatialPoint& a, const SpatialPoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<std::tuple<std::uint32_t, double, double>> sorted_points(const MultiCategoryPointSet& s) {
  std::vector<std::tuple<std::uint32_t, double, double>> out;
  for (const auto& p : s.points) out.emplace_back(p.category.value, p.x, p.y);
  std::sort(out.begin(), out.end());
  return out;
}

PlantSpec ab_spec() {
  PlantSpec s;
  s.arrangement = {kA, kB};
  s.radius = 1.0;
  s.num_motifs = 5;
  s.background_points = 0;
  return s;
}

TEST(GenerateSample, FiveAbPairs) {
  auto s = generate_sample(ab_spec(), 2, 3);
  ASSERT_EQ(s.points.size(), 10u);
  for (std::size_t m = 0; m < 5; ++m) {
    EXPECT_EQ(s.points[2 * m].category, kA);
    EXPECT_EQ(s.points[2 * m + 1].category, kB);
    EXPECT_LE(dist(s.points[2 * m], s.points[2 * m + 1]), 2.0);
  }
  // Brute-force scan: every A has some B within 2.
  for (const auto& a : s.points) {
    if (a.category != kA) continue;
    bool found = false;
    for (const auto& b : s.points) found |= b.category == kB && dist(a, b) <= 2.0;
    EXPECT_TRUE(found);
  }
}

TEST(GenerateSample, NoMotifsIsPureBackground) {
  auto spec = ab_spec();
  spec.num_motifs = 0;
  spec.background_points = 50;
  auto s = generate_sample(spec, 6, 1);
  EXPECT_EQ(s.points.size(), 50u);
  std::set<std::uint32_t> cats;
  for (const auto& p : s.points) cats.insert(p.category.value);
  EXPECT_GT(cats.size(), 3u);
}

TEST(GenerateSample, SeedDetermined) {
  auto spec = ab_spec();
  spec.background_points = 20;
  EXPECT_EQ(generate_sample(spec, 3, 42), generate_sample(spec, 3, 42));
  EXPECT_NE(generate_sample(spec, 3, 42), generate_sample(spec, 3, 43));
}

TEST(GenerateSample, InsideTheBoxAndNormalised) {
  auto spec = ab_spec();
  spec.background_points = 40;
  spec.box_width = 30;
  spec.box_height = 20;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = generate_sample(spec, 2, seed);
    double mx = 1e9, my = 1e9, Mx = -1e9, My = -1e9;
    for (const auto& p : s.points) {
      mx = std::min(mx, p.x), my = std::min(my, p.y);
      Mx = std::max(Mx, p.x), My = std::max(My, p.y);
    }
    EXPECT_EQ(mx, 0.0);
    EXPECT_EQ(my, 0.0);
    EXPECT_LE(Mx, 30.0);
    EXPECT_LE(My, 20.0);
  }
}

TEST(PlantSpec, Validation) {
  auto s = ab_spec();
  EXPECT_NO_THROW(validate_plant_spec(s, 2));
  s.arrangement = {kA};
  EXPECT_THROW(validate_plant_spec(s, 2), Error);
  s = ab_spec();
  s.radius = 25.0;
  EXPECT_THROW(validate_plant_spec(s, 2), Error);
  s.radius = 0.0;
  EXPECT_THROW(validate_plant_spec(s, 2), Error);
  s = ab_spec();
  s.arrangement = {kA, kC};
  EXPECT_THROW(validate_plant_spec(s, 2), Error);
}

TEST(Benchmark, Fig1Counts) {
  auto d = generate_benchmark(fig1_benchmark(), 40, 7);
  EXPECT_EQ(d.samples.size(), 160u);
  EXPECT_EQ(d.distance_matrix.entries(), (Matrix{{1, 2}, {2, 1}}));
  EXPECT_EQ(d.num_categories(), 6u);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> cells;
  for (const auto& s : d.samples) ++cells[{s.place_type.value, s.label.value}];
  for (const auto& [_, n] : cells) EXPECT_EQ(n, 40);
  EXPECT_EQ(d.samples.front().sample_id, "PT1-c0-0000");
  EXPECT_EQ(generate_benchmark(fig1_benchmark(), 5, 7), generate_benchmark(fig1_benchmark(), 5, 7));
}

// Counts A-B pairs within two radii that have no C within two radii of both
// ends. Complete <A,B,C> motifs never qualify; planted <A,B> motifs do.
std::size_t pure_ab_pairs(const MultiCategoryPointSet& s, double reach) {
  std::size_t count = 0;
  for (const auto& a : s.points) {
    if (a.category != kA) continue;
    for (const auto& b : s.points) {
      if (b.category != kB || dist(a, b) > reach) continue;
      bool c_near = false;
      for (const auto& c : s.points)
        c_near |= c.category == kC && dist(a, c) <= reach && dist(b, c) <= reach;
      count += !c_near;
    }
  }
  return count;
}

TEST(Benchmark, AbRuleIsPlaceTypeDependent) {
  const auto config = fig1_benchmark();
  auto d = generate_benchmark(config, 100, 3);
  const double reach = 2 * config.cells.front().radius;
  std::size_t pt1_correct = 0, pt1_total = 0, all_correct = 0;
  for (const auto& s : d.samples) {
    const ClassId predicted(pure_ab_pairs(s, reach) >= 3 ? 0 : 1);
    const bool ok = predicted == s.label;
    all_correct += ok;
    if (s.place_type == PlaceTypeId(0)) {
      ++pt1_total;
      pt1_correct += ok;
    }
  }
  const double pt1_acc = static_cast<double>(pt1_correct) / static_cast<double>(pt1_total);
  const double global_acc = static_cast<double>(all_correct) / static_cast<double>(d.samples.size());
  EXPECT_GE(pt1_acc, 0.95);
  EXPECT_NEAR(global_acc, 0.5, 0.05);
}

TEST(Benchmark, JsonConfig) {
  const std::string json = R"({
    "name": "pairs",
    "categories": ["A", "B", "C", "D"],
    "place_types": ["X", "Y"],
    "distance_matrix": [[1, 3], [3, 1]],
    "threshold": 2,
    "cells": [
      {"place_type": "X", "class_label": 0, "arrangement": ["A", "B"], "radius": 2,
       "num_motifs": 4, "background_points": 10, "box": [50, 60]},
      {"place_type": "X", "class_label": 1, "arrangement": ["C", "D"], "radius": 2,
       "num_motifs": 4, "background_points": 10, "box": [50, 60]}
    ]})";
  auto c = parse_benchmark_config(json);
  EXPECT_EQ(c.name, "pairs");
  ASSERT_EQ(c.cells.size(), 2u);
  EXPECT_EQ(c.cells[1].arrangement, (std::vector<CategoryId>{kC, CategoryId(3)}));
  EXPECT_EQ(c.cells[0].box_height, 60.0);
  auto d = generate_benchmark(c, 3, 1);
  EXPECT_EQ(d.samples.size(), 6u);
  EXPECT_EQ(d.samples[0].points.size(), 18u);
  EXPECT_THROW(parse_benchmark_config("{"), Error);
  EXPECT_THROW(parse_benchmark_config(R"({"name": "x"})"), Error);
}

// ---- partitions -------------------------------------------------------------

MultiCategoryPointSet line(std::initializer_list<double> xs) {
  MultiCategoryPointSet s;
  s.sample_id = "line";
  for (double x : xs) s.points.push_back({kA, x, 0.0});
  return s;
}

TEST(Partition, CutAtTwentyPercent) {
  auto p = partition_mbr(line({0, 1, 10}), 0.2);
  ASSERT_EQ(p.left.points.size(), 2u);
  ASSERT_EQ(p.right.points.size(), 1u);
  EXPECT_EQ(p.left.points[1].x, 1.0);
  EXPECT_EQ(p.right.points[0].x, 0.0);  // re-normalised
  EXPECT_TRUE(p.left_usable);
  EXPECT_FALSE(p.right_usable);
}

TEST(Partition, SidesCoverTheOriginalDisjointly) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    auto s = testing::random_set(rng, 40, 3);
    for (double f : {0.2, 0.8}) {
      auto p = partition_mbr(s, f);
      EXPECT_EQ(p.left.points.size() + p.right.points.size(), s.points.size());
      // Each side is the original subset, translated to its own origin.
      double max_x = 0;
      for (const auto& q : s.points) max_x = std::max(max_x, q.x);
      const double cut = f * max_x;
      MultiCategoryPointSet left, right;
      for (const auto& q : s.points) (q.x < cut ? left : right).points.push_back(q);
      normalize_origin(left);
      normalize_origin(right);
      EXPECT_EQ(sorted_points(p.left), sorted_points(left));
      EXPECT_EQ(sorted_points(p.right), sorted_points(right));
    }
  }
}

TEST(Partition, TwoFractionsGiveComplementaryCuts) {
  // Evenly spaced points: the 20% cut leaves 2 on the left, the 80% cut
  // leaves 2 on the right.
  auto s = line({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  auto a = partition_mbr(s, 0.2), b = partition_mbr(s, 0.8);
  EXPECT_EQ(a.left.points.size(), b.right.points.size() - 1);  // x = 8 sits on the cut
  EXPECT_EQ(a.right.points.size(), 9u);
  EXPECT_EQ(b.left.points.size(), 8u);
  EXPECT_NE(a.left.sample_id, a.right.sample_id);
}

// ---- rotation ---------------------------------------------------------------

TEST(Rotate, QuarterTurnIsClockwise) {
  MultiCategoryPointSet s;
  s.points = {{kA, 0, 0}, {kB, 2, 0}, {kC, 1, 1}};
  auto r = rotate_sample(s, 90);
  EXPECT_NEAR(r.points[0].x, 0.0, 1e-12);
  EXPECT_NEAR(r.points[0].y, 2.0, 1e-12);
  EXPECT_NEAR(r.points[1].x, 0.0, 1e-12);
  EXPECT_NEAR(r.points[1].y, 0.0, 1e-12);
  EXPECT_NEAR(r.points[2].x, 1.0, 1e-12);
  EXPECT_NEAR(r.points[2].y, 1.0, 1e-12);
}

TEST(Rotate, FullTurnAndDistancePreservation) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    auto s = testing::random_set(rng, 30, 2, 50.0);
    auto full = rotate_sample(s, 360);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      EXPECT_NEAR(full.points[i].x, s.points[i].x, 1e-9);
      EXPECT_NEAR(full.points[i].y, s.points[i].y, 1e-9);
    }
    const double angle = 7.5 * (t + 1);
    auto r = rotate_sample(s, angle);
    for (std::size_t i = 0; i < s.points.size(); ++i)
      for (std::size_t j = i + 1; j < s.points.size(); ++j)
        ASSERT_NEAR(dist(r.points[i], r.points[j]), dist(s.points[i], s.points[j]), 1e-9);
    EXPECT_EQ(build_knn_graph(r.points, 4, std::nullopt), build_knn_graph(s.points, 4, std::nullopt));
    auto thrice = rotate_sample(rotate_sample(rotate_sample(s, 16), 16), 16);
    auto once = rotate_sample(s, 48);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      EXPECT_NEAR(thrice.points[i].x, once.points[i].x, 1e-9);
      EXPECT_NEAR(thrice.points[i].y, once.points[i].y, 1e-9);
    }
  }
}

// ---- resampling -------------------------------------------------------------

TEST(SamplePoints, WithoutReplacementFromLargeSet) {
  std::mt19937_64 rng(7);
  auto s = testing::random_set(rng, 5000, 3, 100.0);
  auto r = sample_points(s, 1024, 1);
  ASSERT_EQ(r.points.size(), 1024u);
  std::set<std::pair<double, double>> unique;
  for (const auto& p : r.points) unique.insert({p.x, p.y});
  EXPECT_EQ(unique.size(), 1024u);
}

TEST(SamplePoints, WithReplacementFromSmallSet) {
  std::mt19937_64 rng(8);
  auto s = testing::random_set(rng, 100, 3, 100.0);
  auto r = sample_points(s, 1024, 2);
  ASSERT_EQ(r.points.size(), 1024u);
  // Output is re-normalised; find the translation that maps it back.
  std::set<std::tuple<std::uint32_t, double, double>> original;
  for (const auto& p : s.points) original.insert({p.category.value, p.x, p.y});
  bool matched = false;
  for (const auto& anchor : s.points) {
    const double dx = anchor.x - r.points[0].x, dy = anchor.y - r.points[0].y;
    bool all = true;
    for (const auto& p : r.points)
      all = all && original.count({p.category.value, p.x + dx, p.y + dy});
    matched = matched || all;
  }
  EXPECT_TRUE(matched);
}

TEST(SamplePoints, FullSizeIsAPermutation) {
  std::mt19937_64 rng(9);
  auto s = testing::random_set(rng, 300, 4);
  auto r = sample_points(s, 300, 3);
  EXPECT_EQ(sorted_points(r), sorted_points(s));
  EXPECT_THROW(sample_points(s, 1, 3), Error);
}

// ---- augmentation -----------------------------------------------------------

TEST(Augment, ScheduleAndIds) {
  Dataset d = testing::random_dataset(1, 2, 1, 3, 60);
  AugmentOptions opt;
  auto r = augment_training_set(d, opt);
  EXPECT_TRUE(r.warnings.empty());
  // (original + 4 partitions) x (unrotated + 3 rotations) per sample.
  EXPECT_EQ(r.data.samples.size(), 2u * 5 * 4);
  std::size_t r16 = 0, r32 = 0, r48 = 0;
  for (const auto& s : r.data.samples) {
    const auto& id = s.sample_id;
    r16 += id.ends_with("_r16");
    r32 += id.ends_with("_r32");
    r48 += id.ends_with("_r48");
  }
  EXPECT_EQ(r16, 10u);
  EXPECT_EQ(r32, 10u);
  EXPECT_EQ(r48, 10u);
  EXPECT_EQ(r.data.samples[0], d.samples[0]);

  opt.sample_size = 64;
  auto sized = augment_training_set(d, opt);
  for (const auto& s : sized.data.samples) EXPECT_EQ(s.points.size(), 64u);
  EXPECT_EQ(sized.data, augment_training_set(d, opt).data);
}

TEST(Augment, TinyPartitionsAreDroppedWithWarning) {
  Dataset d = testing::random_dataset(1, 1, 1, 2, 3);
  d.samples[0].points = {{kA, 0, 0}, {kB, 1, 0}, {kA, 10, 0}};
  auto r = augment_training_set(d, {});
  EXPECT_FALSE(r.warnings.empty());
  for (const auto& s : r.data.samples) EXPECT_GE(s.points.size(), 2u);
}

}  // namespace
}  // namespace lucid
