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

#include "lucid/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "lucid/error.hpp"

namespace lucid {

namespace {

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same_map(const std::map<PlaceTypeId, Matrix>& a, const std::map<PlaceTypeId, Matrix>& b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !same_matrix(ia->second, ib->second)) return false;
  }
  return true;
}

std::string key_name(PlaceTypeId p) {
  return p == kSharedPlaceType ? std::string("all") : std::to_string(p.value);
}

const Matrix& lookup(const std::map<PlaceTypeId, Matrix>& m, PlaceTypeId p, const char* what) {
  auto it = m.find(p);
  if (it == m.end()) fail_validation(std::string("no ") + what + " weights for place-type " + key_name(p));
  return it->second;
}

double leaky(double v, double slope) { return v > 0.0 ? v : slope * v; }
double leaky_grad(double v, double slope) { return v > 0.0 ? 1.0 : slope; }

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

struct LayerOutput {
  NodeMatrix aggregated;
  NodeMatrix preactivation;
  NodeMatrix output;
};

LayerOutput run_layer(const NodeMatrix& h_in, const KnnGraph& graph,
                      std::span<const std::uint32_t> categories, const LayerParams& params,
                      PlaceTypeId place_type) {
  const Matrix& W = lookup(params.W, place_type, "W");
  const Matrix& B = lookup(params.B, place_type, "B");
  const auto n = h_in.rows();
  if (static_cast<std::size_t>(n) != graph.num_nodes() ||
      categories.size() != graph.num_nodes())
    fail_validation("layer input rows do not match the graph size");
  if (h_in.cols() != W.cols() || h_in.cols() != B.cols() || W.rows() != B.rows())
    fail_validation("layer dimension mismatch");

  LayerOutput out;
  out.aggregated = NodeMatrix::Zero(n, h_in.cols());
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto cs = categories[static_cast<std::size_t>(s)];
    for (auto u : graph.neighbors(static_cast<std::size_t>(s)))
      out.aggregated.row(s) += params.alpha(cs, categories[u]) * h_in.row(u);
  }
  // Row by row so every node goes through the same arithmetic regardless of
  // its position; node order then cannot leak into the result.
  out.preactivation.resize(n, W.rows());
  for (Eigen::Index s = 0; s < n; ++s) {
    out.preactivation.row(s).noalias() = (W * out.aggregated.row(s).transpose()).transpose();
    out.preactivation.row(s).noalias() += (B * h_in.row(s).transpose()).transpose();
  }
  out.output = out.preactivation.unaryExpr(
      [slope = params.leaky_slope](double v) { return leaky(v, slope); });
  return out;
}

}  // namespace

Eigen::Index LayerParams::in_dim() const { return W.empty() ? 0 : W.begin()->second.cols(); }
Eigen::Index LayerParams::out_dim() const { return W.empty() ? 0 : W.begin()->second.rows(); }

bool operator==(const LayerParams& a, const LayerParams& b) {
  return same_map(a.W, b.W) && same_map(a.B, b.B) && same_matrix(a.alpha, b.alpha) &&
         a.leaky_slope == b.leaky_slope;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  return same_matrix(a.embedding, b.embedding) && a.layers == b.layers &&
         same_matrix(a.classifier, b.classifier) &&
         a.classifier_bias.size() == b.classifier_bias.size() &&
         a.classifier_bias == b.classifier_bias;
}

std::vector<PlaceTypeId> ModelParams::place_types() const {
  std::vector<PlaceTypeId> keys;
  if (layers.empty()) return keys;
  for (const auto& [k, _] : layers.front().W) keys.push_back(k);
  return keys;
}

ModelParams init_model(const ModelShape& shape, std::span<const PlaceTypeId> keys,
                       std::uint64_t seed) {
  if (shape.num_categories == 0 || shape.num_classes < 2 || shape.embedding_dim == 0 ||
      shape.hidden_dim == 0)
    fail_validation("model shape has a zero dimension");
  if (keys.empty()) fail_validation("model needs at least one place-type key");
  std::mt19937_64 rng(seed);
  ModelParams m;
  const auto input_dim = static_cast<Eigen::Index>(shape.num_categories + 2);
  m.embedding = uniform_matrix(static_cast<Eigen::Index>(shape.embedding_dim), input_dim, rng);
  auto in_dim = static_cast<Eigen::Index>(shape.embedding_dim);
  const auto hidden = static_cast<Eigen::Index>(shape.hidden_dim);
  const auto cats = static_cast<Eigen::Index>(shape.num_categories);
  for (std::size_t l = 0; l < shape.num_layers; ++l) {
    LayerParams layer;
    layer.leaky_slope = shape.leaky_slope;
    layer.alpha = Matrix::Ones(cats, cats);
    for (auto key : keys) {
      layer.W[key] = uniform_matrix(hidden, in_dim, rng);
      layer.B[key] = uniform_matrix(hidden, in_dim, rng);
    }
    m.layers.push_back(std::move(layer));
    in_dim = hidden;
  }
  m.classifier = uniform_matrix(static_cast<Eigen::Index>(shape.num_classes), in_dim, rng);
  m.classifier_bias = Vector::Zero(static_cast<Eigen::Index>(shape.num_classes));
  return m;
}

ModelParams rekey(ModelParams params, PlaceTypeId from, PlaceTypeId to) {
  if (from == to) return params;
  for (auto& layer : params.layers) {
    for (auto* map : {&layer.W, &layer.B}) {
      auto node = map->extract(from);
      if (node.empty()) fail_validation("rekey: missing place-type " + key_name(from));
      node.key() = to;
      map->insert(std::move(node));
    }
  }
  return params;
}

void check_model(const ModelParams& params) {
  if (params.embedding.cols() < 3) fail_validation("model embedding has too few columns");
  const auto cats = static_cast<Eigen::Index>(params.num_categories());
  Eigen::Index dim = params.embedding.rows();
  std::vector<PlaceTypeId> keys = params.place_types();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    const std::string tag = "layer " + std::to_string(l) + ": ";
    if (layer.W.size() != layer.B.size()) fail_validation(tag + "W and B key sets differ");
    std::vector<PlaceTypeId> here;
    for (const auto& [key, w] : layer.W) {
      here.push_back(key);
      auto it = layer.B.find(key);
      if (it == layer.B.end()) fail_validation(tag + "W and B key sets differ");
      if (w.cols() != dim || it->second.cols() != dim || w.rows() != it->second.rows() ||
          w.rows() != layer.W.begin()->second.rows())
        fail_validation(tag + "weight shapes do not compose");
      if (!w.allFinite() || !it->second.allFinite()) fail_validation(tag + "non-finite weights");
    }
    if (here != keys) fail_validation(tag + "place-type keys differ from layer 0");
    if (layer.alpha.rows() != cats || layer.alpha.cols() != cats)
      fail_validation(tag + "alpha must be num_categories square");
    if (!layer.alpha.allFinite()) fail_validation(tag + "non-finite alpha");
    dim = layer.out_dim();
  }
  if (params.classifier.cols() != dim) fail_validation("classifier input dim mismatch");
  if (params.classifier_bias.size() != params.classifier.rows())
    fail_validation("classifier bias size mismatch");
}

NodeMatrix node_input_features(const MultiCategoryPointSet& set, std::size_t num_categories) {
  const auto n = static_cast<Eigen::Index>(set.points.size());
  const auto cats = static_cast<Eigen::Index>(num_categories);
  NodeMatrix x = NodeMatrix::Zero(n, cats + 2);
  if (n == 0) return x;
  double min_x = set.points[0].x, max_x = min_x, min_y = set.points[0].y, max_y = min_y;
  for (const auto& p : set.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double w = max_x - min_x;
  const double h = max_y - min_y;
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto& p = set.points[static_cast<std::size_t>(s)];
    if (p.category.value >= num_categories) fail_validation("point category out of range");
    x(s, p.category.value) = 1.0;
    x(s, cats) = w > 0.0 ? (p.x - min_x) / w : 0.0;
    x(s, cats + 1) = h > 0.0 ? (p.y - min_y) / h : 0.0;
  }
  return x;
}

std::vector<std::uint32_t> node_categories(const MultiCategoryPointSet& set) {
  std::vector<std::uint32_t> c;
  c.reserve(set.points.size());
  for (const auto& p : set.points) c.push_back(p.category.value);
  return c;
}

NodeMatrix layer_forward(const NodeMatrix& h_in, const KnnGraph& graph,
                         std::span<const std::uint32_t> categories, const LayerParams& params,
                         PlaceTypeId place_type) {
  return run_layer(h_in, graph, categories, params, place_type).output;
}

ForwardTrace model_forward(const MultiCategoryPointSet& set, const KnnGraph& graph,
                           const ModelParams& params, PlaceTypeId place_type) {
  if (graph.num_nodes() != set.points.size())
    fail_validation("graph was not built from this point set");
  const auto categories = node_categories(set);
  ForwardTrace t;
  t.input = node_input_features(set, params.num_categories());
  NodeMatrix h0(t.input.rows(), params.embedding.rows());
  for (Eigen::Index s = 0; s < h0.rows(); ++s)
    h0.row(s).noalias() = (params.embedding * t.input.row(s).transpose()).transpose();
  t.hidden.push_back(std::move(h0));
  for (const auto& layer : params.layers) {
    auto out = run_layer(t.hidden.back(), graph, categories, layer, place_type);
    t.aggregated.push_back(std::move(out.aggregated));
    t.preactivation.push_back(std::move(out.preactivation));
    t.hidden.push_back(std::move(out.output));
  }
  const NodeMatrix& last = t.hidden.back();
  const auto dim = last.cols();
  t.pooled.resize(dim);
  t.pool_argmax.assign(static_cast<std::size_t>(dim), 0);
  for (Eigen::Index j = 0; j < dim; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index s = 1; s < last.rows(); ++s)
      if (last(s, j) > last(best, j)) best = s;
    t.pooled(j) = last(best, j);
    t.pool_argmax[static_cast<std::size_t>(j)] = best;
  }
  if (params.classifier.cols() != dim) fail_validation("classifier input dim mismatch");
  t.logits = params.classifier * t.pooled + params.classifier_bias;
  const double shift = t.logits.maxCoeff();
  t.probabilities = (t.logits.array() - shift).exp().matrix();
  t.probabilities /= t.probabilities.sum();
  return t;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  if (d_embedding) s += d_embedding->squaredNorm();
  for (const auto& l : layers) {
    for (const auto& [_, g] : l.dW) s += g.squaredNorm();
    for (const auto& [_, g] : l.dB) s += g.squaredNorm();
    if (l.d_alpha) s += l.d_alpha->squaredNorm();
  }
  if (d_classifier) s += d_classifier->squaredNorm();
  if (d_classifier_bias) s += d_classifier_bias->squaredNorm();
  return s;
}

LossAndGradients loss_and_gradients(const MultiCategoryPointSet& set, const KnnGraph& graph,
                                    const ModelParams& params, PlaceTypeId place_type,
                                    ClassId label, const GradientOptions& options) {
  if (label.value >= params.num_classes()) fail_validation("label out of range for the classifier");
  if (options.frozen_layers > params.num_layers())
    fail_validation("frozen layer count exceeds the layer count");
  const ForwardTrace t = model_forward(set, graph, params, place_type);
  const auto categories = node_categories(set);

  LossAndGradients r;
  const double shift = t.logits.maxCoeff();
  const double lse = shift + std::log((t.logits.array() - shift).exp().sum());
  r.cross_entropy = lse - t.logits(label.value);
  r.loss = r.cross_entropy;

  // Readout.
  Vector d_logits = t.probabilities;
  d_logits(label.value) -= 1.0;
  Vector d_pooled = params.classifier.transpose() * d_logits;
  if (options.penalty) {
    const auto& pen = *options.penalty;
    if (pen.anchor.size() != t.pooled.size()) fail_validation("penalty anchor size mismatch");
    const Vector diff = t.pooled - pen.anchor;
    r.loss += pen.lambda * diff.squaredNorm();
    d_pooled += 2.0 * pen.lambda * diff;
  }
  if (!std::isfinite(r.loss)) fail_numerical("non-finite loss on sample '" + set.sample_id + "'");

  if (!options.freeze_classifier) {
    r.grads.d_classifier = d_logits * t.pooled.transpose();
    r.grads.d_classifier_bias = d_logits;
  }

  const std::size_t L = params.num_layers();
  r.grads.layers.resize(L);
  NodeMatrix d_h = NodeMatrix::Zero(t.hidden.back().rows(), t.hidden.back().cols());
  for (std::size_t j = 0; j < t.pool_argmax.size(); ++j)
    d_h(t.pool_argmax[j], static_cast<Eigen::Index>(j)) += d_pooled(static_cast<Eigen::Index>(j));

  for (std::size_t l = L; l-- > options.frozen_layers;) {
    const LayerParams& layer = params.layers[l];
    const Matrix& W = layer.W.at(place_type);
    const Matrix& B = layer.B.at(place_type);
    const NodeMatrix& h_in = t.hidden[l];
    const NodeMatrix& pre = t.preactivation[l];
    const NodeMatrix d_pre = d_h.cwiseProduct(
        pre.unaryExpr([slope = layer.leaky_slope](double v) { return leaky_grad(v, slope); }));

    auto& g = r.grads.layers[l];
    g.dW[place_type] = d_pre.transpose() * t.aggregated[l];
    g.dB[place_type] = d_pre.transpose() * h_in;

    const NodeMatrix d_agg = d_pre * W;
    Matrix d_alpha = Matrix::Zero(layer.alpha.rows(), layer.alpha.cols());
    NodeMatrix d_in = d_pre * B;
    for (Eigen::Index s = 0; s < h_in.rows(); ++s) {
      const auto cs = categories[static_cast<std::size_t>(s)];
      for (auto u : graph.neighbors(static_cast<std::size_t>(s))) {
        const auto cu = categories[u];
        d_alpha(cs, cu) += d_agg.row(s).dot(h_in.row(u));
        d_in.row(u) += layer.alpha(cs, cu) * d_agg.row(s);
      }
    }
    g.d_alpha = std::move(d_alpha);
    d_h = std::move(d_in);
  }
  if (options.frozen_layers == 0) r.grads.d_embedding = d_h.transpose() * t.input;
  return r;
}

ModelParams sgd_step(ModelParams params, const Gradients& grads, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail_validation("learning rate must be finite and >= 0");
  auto apply = [lr](Matrix& p, const Matrix& g, const char* what) {
    if (p.rows() != g.rows() || p.cols() != g.cols())
      fail_validation(std::string("gradient shape mismatch for ") + what);
    if (lr != 0.0) p -= lr * g;
  };
  if (grads.layers.size() > params.layers.size())
    fail_validation("gradient layer count exceeds the model");
  if (grads.d_embedding) apply(params.embedding, *grads.d_embedding, "embedding");
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const auto& g = grads.layers[l];
    for (const auto& [key, dw] : g.dW) {
      auto it = layer.W.find(key);
      if (it == layer.W.end()) fail_validation("gradient for unknown place-type " + key_name(key));
      apply(it->second, dw, "W");
    }
    for (const auto& [key, db] : g.dB) {
      auto it = layer.B.find(key);
      if (it == layer.B.end()) fail_validation("gradient for unknown place-type " + key_name(key));
      apply(it->second, db, "B");
    }
    if (g.d_alpha) apply(layer.alpha, *g.d_alpha, "alpha");
  }
  if (grads.d_classifier) apply(params.classifier, *grads.d_classifier, "classifier");
  if (grads.d_classifier_bias) {
    if (grads.d_classifier_bias->size() != params.classifier_bias.size())
      fail_validation("gradient shape mismatch for classifier bias");
    if (lr != 0.0) params.classifier_bias -= lr * *grads.d_classifier_bias;
  }
  return params;
}

}  // namespace lucid
