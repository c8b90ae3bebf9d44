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

// Place-type parameterised message passing over a spatial KNN graph.
//
// Layer k maps node embeddings H (n x in) to
//
//   out[s] = LeakyReLU( W_p * sum_{u in N(s)} alpha[c(s)][c(u)] * H[u]  +  B_p * H[s] )
//
// where W_p, B_p are selected by the sample's place-type and alpha is one
// category-pair association matrix per layer, shared by all place-types.
// A linear embedding produces H^(0) from node features; the readout is a
// coordinate-wise max over nodes followed by a linear classifier and softmax.
//
// All math runs in double precision. The backward pass is hand-written and is
// checked against central finite differences in the test suite.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lucid/core_data.hpp"
#include "lucid/graph.hpp"

namespace lucid {

/// Node-major matrix: one row per node.
using NodeMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LayerParams {
  std::map<PlaceTypeId, Matrix> W;  ///< neighbourhood weights, out x in
  std::map<PlaceTypeId, Matrix> B;  ///< self weights, out x in
  Matrix alpha;                     ///< num_categories x num_categories
  double leaky_slope = 0.01;

  Eigen::Index in_dim() const;
  Eigen::Index out_dim() const;

  friend bool operator==(const LayerParams& a, const LayerParams& b);
};

struct ModelParams {
  Matrix embedding;  ///< embedding_dim x (num_categories + 2)
  std::vector<LayerParams> layers;
  Matrix classifier;  ///< num_classes x final_dim
  Vector classifier_bias;

  std::size_t num_categories() const {
    return static_cast<std::size_t>(embedding.cols()) - 2;
  }
  std::size_t num_classes() const { return static_cast<std::size_t>(classifier.rows()); }
  std::size_t num_layers() const { return layers.size(); }
  /// Keys of the first layer's W map (all layers share the key set).
  std::vector<PlaceTypeId> place_types() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

struct ModelShape {
  std::size_t num_categories = 1;
  std::size_t num_classes = 2;
  std::size_t embedding_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t num_layers = 4;
  double leaky_slope = 0.01;
};

/// Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, all-ones alpha, zero
/// classifier bias. One W/B pair per key.
ModelParams init_model(const ModelShape& shape, std::span<const PlaceTypeId> keys,
                       std::uint64_t seed);

/// Moves the W/B entry stored under `from` to `to` in every layer.
ModelParams rekey(ModelParams params, PlaceTypeId from, PlaceTypeId to);

/// Throws Error(validation) on inconsistent dimensions or key sets.
void check_model(const ModelParams& params);

/// Row s: one-hot category followed by x/width and y/height of the sample's
/// bounding rectangle (0 when the extent is zero).
NodeMatrix node_input_features(const MultiCategoryPointSet& set, std::size_t num_categories);

std::vector<std::uint32_t> node_categories(const MultiCategoryPointSet& set);

NodeMatrix layer_forward(const NodeMatrix& h_in, const KnnGraph& graph,
                         std::span<const std::uint32_t> categories, const LayerParams& params,
                         PlaceTypeId place_type);

struct ForwardTrace {
  NodeMatrix input;                        ///< node features
  std::vector<NodeMatrix> hidden;          ///< hidden[0] = embedding output, hidden[k] after layer k
  std::vector<NodeMatrix> aggregated;      ///< per layer: alpha-weighted neighbour sums
  std::vector<NodeMatrix> preactivation;   ///< per layer
  Vector pooled;
  std::vector<Eigen::Index> pool_argmax;   ///< winning node per pooled coordinate
  Vector logits;
  Vector probabilities;
};

ForwardTrace model_forward(const MultiCategoryPointSet& set, const KnnGraph& graph,
                           const ModelParams& params, PlaceTypeId place_type);

/// Sparse gradient tree. Absent entries mean "leave this tensor alone" to
/// sgd_step, which is how frozen layers and untouched place-types are expressed.
struct LayerGradients {
  std::map<PlaceTypeId, Matrix> dW;
  std::map<PlaceTypeId, Matrix> dB;
  std::optional<Matrix> d_alpha;
};

struct Gradients {
  std::optional<Matrix> d_embedding;
  std::vector<LayerGradients> layers;
  std::optional<Matrix> d_classifier;
  std::optional<Vector> d_classifier_bias;

  double squared_norm() const;
};

/// Squared distance penalty between the pooled representation and a fixed
/// anchor: lambda * ||pooled - anchor||^2.
struct RepresentationPenalty {
  Vector anchor;
  double lambda = 1.0;
};

struct GradientOptions {
  /// Message-passing layers [0, frozen_layers) get no gradients; the
  /// embedding is frozen along with them when frozen_layers > 0.
  std::size_t frozen_layers = 0;
  bool freeze_classifier = false;
  std::optional<RepresentationPenalty> penalty;
};

struct LossAndGradients {
  double loss = 0.0;  ///< cross-entropy plus the penalty term, if any
  double cross_entropy = 0.0;
  Gradients grads;
};

/// Throws Error(numerical) on a non-finite loss.
LossAndGradients loss_and_gradients(const MultiCategoryPointSet& set, const KnnGraph& graph,
                                    const ModelParams& params, PlaceTypeId place_type,
                                    ClassId label, const GradientOptions& options = {});

/// p' = p - lr * g for every tensor present in `grads`.
ModelParams sgd_step(ModelParams params, const Gradients& grads, double lr);

}  // namespace lucid
