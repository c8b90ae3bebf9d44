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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "lucid/checkpoint.hpp"
#include "lucid/error.hpp"
#include "test_util.hpp"

namespace lucid {
namespace {

ModelCheckpoint sample_checkpoint(std::uint64_t seed) {
  ModelShape shape;
  shape.num_categories = 3;
  shape.num_classes = 2;
  shape.embedding_dim = 5;
  shape.hidden_dim = 4;
  shape.num_layers = 3;
  std::vector<PlaceTypeId> keys{PlaceTypeId(0), PlaceTypeId(2)};
  ModelCheckpoint c;
  c.params = init_model(shape, keys, seed);
  c.params.layers[1].alpha(0, 2) = 0.1 + 0.2;
  c.params.layers[2].alpha(1, 1) = -std::numeric_limits<double>::denorm_min();
  c.params.classifier_bias(1) = 1.0 / 3.0;
  c.seed = seed * 1000003;
  c.metadata = {{"strategy", "wdlr"}, {"git", "abc123"}};
  return c;
}

TEST(Checkpoint, TextRoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = sample_checkpoint(seed);
    const auto text = serialize_model(c);
    auto back = parse_model(text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(serialize_model(back), text);
  }
}

TEST(Checkpoint, SharedKeySurvives) {
  ModelShape shape;
  shape.num_layers = 1;
  shape.embedding_dim = shape.hidden_dim = 2;
  std::vector<PlaceTypeId> keys{kSharedPlaceType};
  ModelCheckpoint c;
  c.params = init_model(shape, keys, 3);
  EXPECT_EQ(parse_model(serialize_model(c)), c);
}

TEST(Checkpoint, FileRoundTrip) {
  testing::TempDir dir;
  auto c = sample_checkpoint(4);
  save_model(c, dir.path() / "m.txt");
  EXPECT_EQ(load_model(dir.path() / "m.txt"), c);
}

TEST(Checkpoint, RejectsDamagedInput) {
  const auto text = serialize_model(sample_checkpoint(1));
  EXPECT_THROW(parse_model(""), Error);
  EXPECT_THROW(parse_model("lucid-model 99\n"), Error);
  EXPECT_THROW(parse_model(text.substr(0, text.size() / 2)), Error);
  testing::TempDir dir;
  EXPECT_THROW(load_model(dir.path() / "missing.txt"), Error);
}

}  // namespace
}  // namespace lucid
