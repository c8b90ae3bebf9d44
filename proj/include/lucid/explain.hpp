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

// Relationship-level explanations. Every node is described by its category
// and the multiset of its neighbours' categories; a block (c, M) collects the
// nodes of category c whose neighbourhood contains the multiset M. A sample's
// block feature is the mean hidden representation of those nodes (zero when
// there are none). A logistic probe is fitted on the block features and each
// block is scored by how much probe accuracy drops when it is shuffled.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lucid/core_data.hpp"
#include "lucid/graph.hpp"
#include "lucid/network.hpp"
#include "lucid/training.hpp"

namespace lucid {

struct RelationshipBlock {
  CategoryId center;
  std::vector<CategoryId> neighbors;  ///< sorted, may repeat

  friend auto operator<=>(const RelationshipBlock&, const RelationshipBlock&) = default;
};

/// All blocks with 1..max_subset neighbours, in lexicographic order.
std::vector<RelationshipBlock> enumerate_blocks(std::size_t num_categories,
                                                std::size_t max_subset);

/// "C|A,B" style name.
std::string block_name(const RelationshipBlock& block,
                       const std::vector<std::string>& category_names);

/// Concatenated per-block mean of hidden[layer_index] (blocks.size() * dim
/// entries). layer_index 0 is the embedding output.
Vector relationship_features(const MultiCategoryPointSet& set, const KnnGraph& graph,
                             const ModelParams& params, PlaceTypeId place_type,
                             std::span<const RelationshipBlock> blocks,
                             std::size_t layer_index);

struct ProbeOptions {
  double l2 = 0.1;
  double learning_rate = 0.5;
  std::size_t iterations = 300;
};

/// Multinomial logistic regression on standardised features, full-batch
/// gradient descent from zero weights.
class LogisticProbe {
 public:
  static LogisticProbe fit(const Matrix& features, const std::vector<std::uint32_t>& labels,
                           std::size_t num_classes, const ProbeOptions& options = {});

  /// Standardised design matrix for `features` (one row per sample).
  Matrix standardize(const Matrix& features) const;
  /// Class scores for standardised rows.
  Matrix scores(const Matrix& standardized) const;
  double accuracy(const Matrix& standardized, const std::vector<std::uint32_t>& labels) const;

  const Matrix& weights() const { return weights_; }

 private:
  Vector mean_, scale_;  ///< scale_ is 1/std, or 0 for constant columns
  Matrix weights_;       ///< classes x features
  Vector bias_;
};

struct ExplainOptions {
  /// Restrict to one place-type's samples and member; nullopt = global.
  std::optional<PlaceTypeId> place_type;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  std::size_t max_subset = 3;
  /// Hidden layer to read; defaults to the last.
  std::optional<std::size_t> layer_index;
  ProbeOptions probe;
};

struct BlockImportance {
  RelationshipBlock block;
  std::string name;
  double importance = 0.0;  ///< baseline accuracy minus mean shuffled accuracy
  double stddev = 0.0;
};

struct ExplainReport {
  std::vector<BlockImportance> ranking;  ///< descending importance, ties by block order
  double probe_train_accuracy = 0.0;
  double probe_eval_accuracy = 0.0;
  std::size_t num_train = 0;
  std::size_t num_eval = 0;
};

/// Importance of block j: probe accuracy on `eval` minus the accuracy after
/// permuting block j's rows across eval samples, averaged over `repeats`
/// seeded permutations.
ExplainReport permutation_importance(const TrainedEnsemble& ensemble, const Dataset& train,
                                     const Dataset& eval, const ExplainOptions& options);

}  // namespace lucid
