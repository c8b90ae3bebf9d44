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
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "lucid/error.hpp"
#include "lucid/training.hpp"
#include "test_util.hpp"

namespace lucid {
namespace {

const PlaceTypeId kP0(0), kP1(1), kP2(2);

StrategyConfig small_config(StrategyKind kind) {
  StrategyConfig c;
  c.kind = kind;
  c.base_lr = 0.01;
  c.epochs = 3;
  c.seed = 17;
  c.k_neighbors = 3;
  c.num_layers = 2;
  c.hidden_dim = 4;
  return c;
}

// Three place-types one step apart: distances 1, 2, 3.
Dataset ladder_dataset(std::uint64_t seed, std::size_t n, double threshold) {
  Dataset d = testing::random_dataset(seed, n, 3, 3);
  d.distance_matrix = validate_distance_matrix(Matrix{{1, 2, 3}, {2, 1, 2}, {3, 2, 1}}, threshold);
  return d;
}

Dataset empty_like(const Dataset& d) {
  Dataset e = d;
  e.samples.clear();
  return e;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no lucid::Error thrown";
  return ErrorKind::usage;
}

// ---- learning rates and sample selection ------------------------------------

TEST(EffectiveLearningRate, WorkedExample) {
  EXPECT_EQ(effective_learning_rate(1e-3, 1), 1e-3);
  EXPECT_EQ(effective_learning_rate(1e-3, 2), 5e-4);
  EXPECT_EQ(effective_learning_rate(1e-3, 3), 1e-3 / 3);
  EXPECT_NEAR(effective_learning_rate(1e-3, 3), 3.333e-4, 1e-7);
  EXPECT_THROW(effective_learning_rate(1e-3, 0.5), Error);
  EXPECT_THROW(effective_learning_rate(0.0, 1), Error);
}

TEST(SelectTrainingSamples, ThresholdFiltersByDistance) {
  for (double threshold : {1.0, 2.0, 3.0}) {
    Dataset d = ladder_dataset(1, 30, threshold);
    auto picked = select_training_samples(d, kP0, d.distance_matrix);
    std::size_t expected = 0;
    for (const auto& s : d.samples) expected += 1.0 + s.place_type.value <= threshold;
    EXPECT_EQ(picked.size(), expected) << threshold;
    for (const auto& w : picked) {
      EXPECT_EQ(w.distance, 1.0 + d.samples[w.index].place_type.value);
      EXPECT_LE(w.distance, threshold);
    }
  }
  Dataset d = ladder_dataset(1, 30, 3.0);
  EXPECT_EQ(select_training_samples(d, kP0, d.distance_matrix).size(), 30u);
  EXPECT_THROW(select_training_samples(d, PlaceTypeId(7), d.distance_matrix), Error);
}

// ---- splits -----------------------------------------------------------------

Dataset one_stratum(std::size_t n) {
  Dataset d = testing::random_dataset(3, n, 1, 2, 4, 1);
  d.samples.push_back(d.samples.front());  // label 1 sample so two classes exist
  d.samples.back().sample_id = "other";
  d.samples.back().label = ClassId(1);
  return d;
}

TEST(Split, LargestRemainderRounding) {
  for (auto [n, tr, va, te] : std::vector<std::array<std::size_t, 4>>{
           {5, 3, 1, 1}, {100, 60, 20, 20}, {7, 4, 2, 1}, {10, 6, 2, 2}}) {
    Dataset d = testing::random_dataset(3, n, 1, 2, 4, 1);
    auto s = split_dataset(d, 9);
    EXPECT_EQ(s.train.size(), tr) << n;
    EXPECT_EQ(s.val.size(), va) << n;
    EXPECT_EQ(s.test.size(), te) << n;
    EXPECT_TRUE(s.warnings.empty());
  }
}

TEST(Split, SmallStratumWarns) {
  auto s = split_dataset(one_stratum(20), 1);
  ASSERT_EQ(s.warnings.size(), 1u);
  EXPECT_NE(s.warnings[0].find("label 1"), std::string::npos);
}

TEST(Split, DisjointCoverageAndDeterminism) {
  Dataset d = ladder_dataset(4, 90, 1);
  auto a = split_dataset(d, 5), b = split_dataset(d, 5), c = split_dataset(d, 6);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, c.train);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.val.begin(), a.val.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 90u);
}

TEST(Split, IndependentOfSampleOrder) {
  Dataset d = ladder_dataset(4, 60, 1);
  Dataset shuffled = d;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), rng);
  auto ids = [](const Dataset& data, const std::vector<std::size_t>& idx) {
    std::set<std::string> out;
    for (auto i : idx) out.insert(data.samples[i].sample_id);
    return out;
  };
  auto a = split_dataset(d, 2), b = split_dataset(shuffled, 2);
  EXPECT_EQ(ids(d, a.train), ids(shuffled, b.train));
  EXPECT_EQ(ids(d, a.test), ids(shuffled, b.test));
}

// ---- strategies -------------------------------------------------------------

TEST(Validation, RejectsBadConfigs) {
  auto c = small_config(StrategyKind::osfa);
  c.sda_frozen_layers = 1;
  EXPECT_EQ(kind_of([&] { validate_config(c); }), ErrorKind::usage);
  c = small_config(StrategyKind::sda);
  c.sda_frozen_layers = 3;
  EXPECT_EQ(kind_of([&] { validate_config(c); }), ErrorKind::usage);
  c = small_config(StrategyKind::wdlr);
  c.base_lr = 0;
  EXPECT_EQ(kind_of([&] { validate_config(c); }), ErrorKind::usage);
  c = small_config(StrategyKind::wdlr);
  c.k_neighbors = 0;
  EXPECT_EQ(kind_of([&] { validate_config(c); }), ErrorKind::usage);
}

TEST(Training, EmptyTrainingSplitIsAnError) {
  Dataset d = ladder_dataset(2, 12, 1);
  for (auto kind : {StrategyKind::osfa, StrategyKind::place_type, StrategyKind::wdlr,
                    StrategyKind::sda})
    EXPECT_EQ(kind_of([&] { train(empty_like(d), d, small_config(kind)); }),
              ErrorKind::validation);
}

TEST(Training, PlaceTypeBuildsOneMemberPerType) {
  Dataset d = ladder_dataset(2, 24, 1);
  auto e = train(d, d, small_config(StrategyKind::place_type));
  EXPECT_EQ(e.members.size(), 3u);
  EXPECT_FALSE(e.is_shared());
  for (const auto& [k, m] : e.members) EXPECT_EQ(m.place_types(), std::vector<PlaceTypeId>{k});
  EXPECT_EQ(e.summaries.at(kP1).num_samples, 8u);
}

TEST(Training, LogHasOneEntryPerEpochAndLossFallsOnSeparableData) {
  // Class 0 samples contain only category A, class 1 only category B.
  Dataset d = testing::random_dataset(8, 20, 1, 2, 10);
  for (auto& s : d.samples)
    for (auto& p : s.points) p.category = CategoryId(s.label.value);
  auto c = small_config(StrategyKind::place_type);
  c.epochs = 2;
  auto e = train(d, empty_like(d), c);
  ASSERT_EQ(e.training_log.size(), 2u);
  EXPECT_LE(e.training_log[1].mean_loss, e.training_log[0].mean_loss);
}

TEST(Training, SingleTypeOsfaMatchesPlaceType) {
  Dataset d = testing::random_dataset(6, 16, 1, 3);
  auto c = small_config(StrategyKind::osfa);
  auto o = train(d, d, c);
  c.kind = StrategyKind::place_type;
  auto p = train(d, d, c);
  ASSERT_TRUE(o.is_shared());
  EXPECT_EQ(rekey(o.members.at(kSharedPlaceType), kSharedPlaceType, kP0), p.members.at(kP0));
  EXPECT_EQ(evaluate(o, d), evaluate(p, d));
}

TEST(Training, SampleOrderDoesNotMatter) {
  Dataset d = ladder_dataset(7, 30, 2);
  Dataset shuffled = d;
  std::mt19937_64 rng(3);
  std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), rng);
  for (auto kind : {StrategyKind::osfa, StrategyKind::wdlr, StrategyKind::sda}) {
    auto a = train(d, d, small_config(kind));
    auto b = train(shuffled, shuffled, small_config(kind));
    EXPECT_EQ(a.members, b.members) << to_string(kind);
  }
}

TEST(Wdlr, ThresholdOneEqualsPlaceType) {
  Dataset d = ladder_dataset(9, 24, 3);
  auto c = small_config(StrategyKind::wdlr);
  c.alpha_threshold = 1.0;
  auto w = train(d, d, c);
  c.kind = StrategyKind::place_type;
  c.alpha_threshold.reset();
  auto p = train(d, d, c);
  EXPECT_EQ(w.members, p.members);
}

TEST(Wdlr, ThresholdThreeUsesEveryRate) {
  Dataset d = ladder_dataset(9, 24, 3);
  auto c = small_config(StrategyKind::wdlr);
  c.base_lr = 1e-3;
  c.epochs = 1;
  auto e = train(d, d, c);
  const std::vector<double> rates{1e-3, 5e-4, 1e-3 / 3};
  EXPECT_EQ(e.summaries.at(kP0).learning_rates, rates);
  EXPECT_EQ(e.summaries.at(kP0).num_samples, 24u);
  EXPECT_EQ(e.summaries.at(kP2).learning_rates, rates);
  EXPECT_EQ(e.summaries.at(kP1).learning_rates, (std::vector<double>{1e-3, 5e-4}));
}

TEST(Wdlr, DistanceTwoSampleMovesHalfAsFar) {
  // Member PT1 sees exactly one sample: once as its own place-type, once as
  // a distance-2 neighbour. A PT3 sample outside the threshold supplies the
  // second class.
  Dataset base = ladder_dataset(10, 2, 2);
  base.samples[0].place_type = kP0;
  base.samples[0].label = ClassId(0);
  base.samples[1].place_type = kP2;
  base.samples[1].label = ClassId(1);
  Dataset moved = base;
  moved.samples[0].place_type = kP1;

  auto c = small_config(StrategyKind::wdlr);
  c.epochs = 1;
  c.select_on_validation = false;
  c.target_place_type = kP0;
  auto near = train(base, empty_like(base), c).members.at(kP0);
  auto far = train(moved, empty_like(moved), c).members.at(kP0);
  const PlaceTypeId key = kP0;
  ModelShape shape;
  shape.num_categories = 3;
  shape.embedding_dim = shape.hidden_dim = 4;
  shape.num_layers = 2;
  const auto init = init_model(shape, std::span(&key, 1), c.seed);

  auto check = [](const Matrix& p0, const Matrix& a, const Matrix& b) {
    const Matrix da = a - p0, db = b - p0;
    ASSERT_GT(da.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT((db - 0.5 * da).cwiseAbs().maxCoeff(), 1e-15);
  };
  check(init.classifier, near.classifier, far.classifier);
  check(init.embedding, near.embedding, far.embedding);
  for (std::size_t l = 0; l < 2; ++l) {
    check(init.layers[l].W.at(kP0), near.layers[l].W.at(kP0), far.layers[l].W.at(kP0));
    check(init.layers[l].B.at(kP0), near.layers[l].B.at(kP0), far.layers[l].B.at(kP0));
  }
}

// ---- sda --------------------------------------------------------------------

ModelParams pretrained_for(const Dataset& d, StrategyConfig c) {
  c.kind = StrategyKind::osfa;
  c.sda_frozen_layers = 0;
  return train(d, d, c).members.at(kSharedPlaceType);
}

TEST(Sda, FrozenTensorsAreBitIdentical) {
  Dataset d = ladder_dataset(11, 30, 1);
  auto c = small_config(StrategyKind::sda);
  c.num_layers = 3;
  c.select_on_validation = false;
  const auto pre = pretrained_for(d, c);
  for (std::size_t k = 0; k <= 3; ++k) {
    c.sda_frozen_layers = k;
    auto e = train(d, d, c);
    for (auto p : {kP0, kP1, kP2}) {
      const auto& m = e.members.at(p);
      const auto ref = rekey(pre, kSharedPlaceType, p);
      for (std::size_t l = 0; l < 3; ++l) {
        const bool frozen = l < k;
        EXPECT_EQ(m.layers[l].W.at(p) == ref.layers[l].W.at(p), frozen) << k << " " << l;
        EXPECT_EQ(m.layers[l].B.at(p) == ref.layers[l].B.at(p), frozen);
        EXPECT_EQ(m.layers[l].alpha == ref.layers[l].alpha, frozen);
      }
      EXPECT_EQ(m.embedding == ref.embedding, k > 0);
      EXPECT_NE(m.classifier, ref.classifier);
    }
  }
}

TEST(Sda, FullFreezeIsPretrainedModel) {
  Dataset d = ladder_dataset(12, 24, 1);
  auto c = small_config(StrategyKind::sda);
  c.sda_frozen_layers = c.num_layers;
  c.sda_freeze_classifier = true;
  const auto pre = pretrained_for(d, c);
  auto e = train(d, d, c);
  for (auto p : {kP0, kP1, kP2}) EXPECT_EQ(e.members.at(p), rekey(pre, kSharedPlaceType, p));
}

TEST(Sda, ZeroLambdaIsPlainFineTuning) {
  Dataset d = ladder_dataset(13, 24, 1);
  auto c = small_config(StrategyKind::sda);
  const auto pre = pretrained_for(d, c);
  FineTuneOptions with_zero{0, false, 0.0};
  FineTuneOptions without{0, false, std::nullopt};
  EXPECT_EQ(fine_tune(pre, d, d, kP1, c, with_zero), fine_tune(pre, d, d, kP1, c, without));
  FineTuneOptions positive{0, false, 5.0};
  EXPECT_NE(fine_tune(pre, d, d, kP1, c, positive), fine_tune(pre, d, d, kP1, c, without));
}

TEST(Sda, TrainMatchesManualFineTune) {
  Dataset d = ladder_dataset(14, 24, 1);
  auto c = small_config(StrategyKind::sda);
  c.sda_frozen_layers = 1;
  c.sda_lambda = 0.5;
  const auto pre = pretrained_for(d, c);
  auto e = train(d, d, c);
  FineTuneOptions opt{1, false, 0.5};
  EXPECT_EQ(e.members.at(kP2), fine_tune(pre, d, d, kP2, c, opt));
}

TEST(Sda, SweepHasInclusiveRowsAndDiagnostics) {
  Dataset d = ladder_dataset(15, 30, 1);
  auto c = small_config(StrategyKind::sda);
  auto rows = sweep_frozen_layers(d, d, d, c);
  ASSERT_EQ(rows.size(), c.num_layers + 3);
  for (std::size_t k = 0; k <= c.num_layers; ++k) {
    EXPECT_EQ(rows[k].name, "k=" + std::to_string(k));
    EXPECT_EQ(rows[k].frozen_layers, k);
  }
  EXPECT_EQ(rows[c.num_layers + 1].name, "full_freeze");
  EXPECT_EQ(rows[c.num_layers + 2].name, "pretrained");
  EXPECT_EQ(rows[c.num_layers + 1].report, rows[c.num_layers + 2].report);
}

// ---- prediction -------------------------------------------------------------

TEST(Aggregation, ModesDiverge) {
  std::vector<Vector> probs{Eigen::Vector2d(0.6, 0.4), Eigen::Vector2d(0.1, 0.9)};
  EXPECT_EQ(combine_predictions(probs, Aggregation::weighted_average), ClassId(1));
  EXPECT_EQ(combine_predictions(probs, Aggregation::majority_vote), ClassId(0));
  std::vector<Vector> agree{Eigen::Vector2d(0.2, 0.8), Eigen::Vector2d(0.4, 0.6)};
  EXPECT_EQ(combine_predictions(agree, Aggregation::weighted_average), ClassId(1));
  EXPECT_EQ(combine_predictions(agree, Aggregation::majority_vote), ClassId(1));
  EXPECT_THROW(combine_predictions({}, Aggregation::majority_vote), Error);
}

TEST(Routing, OtherMembersAreNeverConsulted) {
  Dataset d = ladder_dataset(16, 30, 1);
  auto e = train(d, d, small_config(StrategyKind::place_type));
  auto graphs = build_graphs(d, 3, std::nullopt);
  std::vector<Prediction> before;
  for (std::size_t i = 0; i < d.samples.size(); ++i)
    before.push_back(aggregate_predictions(e, d.samples[i], graphs[i]));
  for (auto& l : e.members.at(kP0).layers) l.W.at(kP0).setConstant(1e6);
  e.members.at(kP0).classifier.setConstant(-3);
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    if (d.samples[i].place_type == kP0) continue;
    auto after = aggregate_predictions(e, d.samples[i], graphs[i]);
    EXPECT_EQ(after.probabilities, before[i].probabilities);
  }
  e.members.erase(kP2);
  EXPECT_EQ(kind_of([&] { evaluate(e, d); }), ErrorKind::validation);
}

TEST(Routing, SharedMemberServesEveryType) {
  Dataset d = ladder_dataset(17, 18, 1);
  auto e = train(d, d, small_config(StrategyKind::osfa));
  ASSERT_EQ(e.members.size(), 1u);
  auto graphs = build_graphs(d, 3, std::nullopt);
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    auto p = aggregate_predictions(e, d.samples[i], graphs[i]);
    auto t = model_forward(d.samples[i], graphs[i], e.members.at(kSharedPlaceType), kSharedPlaceType);
    EXPECT_EQ(p.probabilities, t.probabilities);
  }
}

TEST(Evaluate, GroupsCombineBeforeScoring) {
  EXPECT_EQ(group_key("slide7:tile3"), "slide7");
  EXPECT_EQ(group_key("whole"), "whole");
  Dataset d = ladder_dataset(18, 12, 1);
  for (std::size_t i = 0; i < d.samples.size(); ++i)
    d.samples[i].sample_id = "g" + std::to_string(i / 2) + ":" + std::to_string(i);
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    d.samples[i].label = d.samples[i - i % 2].label;
    d.samples[i].place_type = d.samples[i - i % 2].place_type;
  }
  auto e = train(d, d, small_config(StrategyKind::osfa));
  EXPECT_EQ(evaluate_groups(e, d, Aggregation::weighted_average).total(), 6u);
  d.samples[1].label = ClassId(1 - d.samples[0].label.value);
  EXPECT_THROW(evaluate_groups(e, d, Aggregation::majority_vote), Error);
}

TEST(Training, DivergenceIsNumericalError) {
  Dataset d = ladder_dataset(19, 12, 1);
  auto c = small_config(StrategyKind::osfa);
  c.base_lr = 1e250;
  EXPECT_EQ(kind_of([&] { train(d, d, c); }), ErrorKind::numerical);
}

// ---- persistence ------------------------------------------------------------

TEST(EnsembleIo, SaveLoadRoundTrip) {
  Dataset d = ladder_dataset(20, 24, 2);
  auto c = small_config(StrategyKind::wdlr);
  c.alpha_threshold = 2.0;
  c.cutoff = 4.5;
  auto e = train(d, d, c);
  e.metadata["run"] = "abc";
  testing::TempDir dir;
  save_ensemble(e, dir.path());
  auto back = load_ensemble(dir.path());
  EXPECT_EQ(back.members, e.members);
  EXPECT_EQ(back.summaries, e.summaries);
  EXPECT_EQ(back.config, e.config);
  EXPECT_EQ(back.training_log, e.training_log);
  EXPECT_EQ(back.metadata, e.metadata);
  EXPECT_EQ(evaluate(back, d), evaluate(e, d));
  EXPECT_THROW(load_ensemble(dir.path() / "nope"), Error);
}

}  // namespace
}  // namespace lucid
