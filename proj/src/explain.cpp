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

#include "lucid/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lucid/error.hpp"
#include "parallel.hpp"

namespace lucid {

namespace {

void enumerate_multisets(std::size_t num_categories, std::size_t size, std::uint32_t start,
                         std::vector<CategoryId>& current,
                         std::vector<std::vector<CategoryId>>& out) {
  if (current.size() == size) {
    out.push_back(current);
    return;
  }
  for (std::uint32_t c = start; c < num_categories; ++c) {
    current.push_back(CategoryId(c));
    enumerate_multisets(num_categories, size, c, current, out);
    current.pop_back();
  }
}

// Member and parameter key that serve `pt` in this ensemble.
std::pair<const ModelParams*, PlaceTypeId> route(const TrainedEnsemble& ensemble, PlaceTypeId pt) {
  if (auto it = ensemble.members.find(kSharedPlaceType); it != ensemble.members.end())
    return {&it->second, kSharedPlaceType};
  auto it = ensemble.members.find(pt);
  if (it == ensemble.members.end())
    fail_validation("no ensemble member for place-type " + std::to_string(pt.value));
  return {&it->second, pt};
}

struct FeatureTable {
  Matrix rows;  // one sample per row
  std::vector<std::uint32_t> labels;
};

FeatureTable feature_table(const TrainedEnsemble& ensemble, const Dataset& data,
                           std::optional<PlaceTypeId> only,
                           std::span<const RelationshipBlock> blocks,
                           std::optional<std::size_t> layer_index) {
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < data.samples.size(); ++i)
    if (!only || data.samples[i].place_type == *only) picked.push_back(i);
  if (picked.empty()) fail_validation("explain: no samples for the requested place-type");

  std::vector<Vector> feats(picked.size());
  parallel_for(picked.size(), [&](std::size_t j) {
    const auto& s = data.samples[picked[j]];
    const auto [params, key] = route(ensemble, s.place_type);
    const std::size_t layer = layer_index.value_or(params->num_layers());
    const auto graph =
        build_knn_graph(s.points, ensemble.config.k_neighbors, ensemble.config.cutoff);
    feats[j] = relationship_features(s, graph, *params, key, blocks, layer);
  });

  FeatureTable t;
  t.rows.resize(static_cast<Eigen::Index>(picked.size()), feats.front().size());
  for (std::size_t j = 0; j < picked.size(); ++j) {
    if (feats[j].size() != t.rows.cols())
      fail_validation("explain: members disagree on the hidden dimension");
    t.rows.row(static_cast<Eigen::Index>(j)) = feats[j].transpose();
    t.labels.push_back(data.samples[picked[j]].label.value);
  }
  return t;
}

std::size_t row_argmax(const Matrix& m, Eigen::Index r) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c)
    if (m(r, c) > m(r, best)) best = c;
  return static_cast<std::size_t>(best);
}

}  // namespace

std::vector<RelationshipBlock> enumerate_blocks(std::size_t num_categories,
                                                std::size_t max_subset) {
  if (num_categories == 0) fail_usage("explain: no categories");
  if (max_subset == 0) fail_usage("explain: max subset size must be positive");
  std::vector<std::vector<CategoryId>> multisets;
  for (std::size_t size = 1; size <= max_subset; ++size) {
    std::vector<CategoryId> current;
    enumerate_multisets(num_categories, size, 0, current, multisets);
  }
  std::vector<RelationshipBlock> blocks;
  for (std::uint32_t c = 0; c < num_categories; ++c)
    for (const auto& m : multisets) blocks.push_back({CategoryId(c), m});
  std::sort(blocks.begin(), blocks.end());
  return blocks;
}

std::string block_name(const RelationshipBlock& block,
                       const std::vector<std::string>& category_names) {
  auto name = [&](CategoryId c) {
    return c.value < category_names.size() ? category_names[c.value]
                                           : std::to_string(c.value);
  };
  std::string out = name(block.center) + "|";
  for (std::size_t i = 0; i < block.neighbors.size(); ++i) {
    if (i) out += ",";
    out += name(block.neighbors[i]);
  }
  return out;
}

Vector relationship_features(const MultiCategoryPointSet& set, const KnnGraph& graph,
                             const ModelParams& params, PlaceTypeId place_type,
                             std::span<const RelationshipBlock> blocks,
                             std::size_t layer_index) {
  if (layer_index > params.num_layers())
    fail_usage("explain: layer index " + std::to_string(layer_index) + " exceeds " +
               std::to_string(params.num_layers()) + " layers");
  const auto trace = model_forward(set, graph, params, place_type);
  const NodeMatrix& h = trace.hidden[layer_index];
  const Eigen::Index dim = h.cols();
  const std::size_t nc = params.num_categories();

  // Neighbour category counts per node.
  std::vector<std::vector<std::uint32_t>> counts(set.points.size(),
                                                 std::vector<std::uint32_t>(nc, 0));
  for (std::size_t s = 0; s < set.points.size(); ++s)
    for (auto u : graph.neighbors(s)) ++counts[s][set.points[u].category.value];

  Vector out = Vector::Zero(static_cast<Eigen::Index>(blocks.size()) * dim);
  std::vector<std::uint32_t> need(nc);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    std::fill(need.begin(), need.end(), 0u);
    for (auto c : block.neighbors) ++need[c.value];
    Vector sum = Vector::Zero(dim);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < set.points.size(); ++s) {
      if (set.points[s].category != block.center) continue;
      bool ok = true;
      for (std::size_t c = 0; c < nc && ok; ++c) ok = counts[s][c] >= need[c];
      if (!ok) continue;
      sum += h.row(static_cast<Eigen::Index>(s)).transpose();
      ++hits;
    }
    if (hits) out.segment(static_cast<Eigen::Index>(b) * dim, dim) = sum / static_cast<double>(hits);
  }
  return out;
}

LogisticProbe LogisticProbe::fit(const Matrix& features, const std::vector<std::uint32_t>& labels,
                                 std::size_t num_classes, const ProbeOptions& options) {
  const Eigen::Index n = features.rows(), d = features.cols();
  if (n == 0 || static_cast<std::size_t>(n) != labels.size())
    fail_validation("probe: feature rows and labels disagree");
  if (num_classes < 2) fail_validation("probe: need at least two classes");

  LogisticProbe p;
  p.mean_ = features.colwise().mean().transpose();
  p.scale_ = Vector::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = (features.col(j).array() - p.mean_(j)).square().mean();
    if (var > 0.0) p.scale_(j) = 1.0 / std::sqrt(var);
  }
  const Matrix x = p.standardize(features);
  const auto k = static_cast<Eigen::Index>(num_classes);
  p.weights_ = Matrix::Zero(k, d);
  p.bias_ = Vector::Zero(k);
  Matrix onehot = Matrix::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;

  for (std::size_t it = 0; it < options.iterations; ++it) {
    Matrix z = p.scores(x);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = z.row(i).maxCoeff();
      z.row(i) = (z.row(i).array() - m).exp();
      z.row(i) /= z.row(i).sum();
    }
    const Matrix err = (z - onehot) / static_cast<double>(n);
    p.weights_ -= options.learning_rate * (err.transpose() * x + options.l2 * p.weights_);
    p.bias_ -= options.learning_rate * err.colwise().sum().transpose();
  }
  return p;
}

Matrix LogisticProbe::standardize(const Matrix& features) const {
  if (features.cols() != mean_.size()) fail_validation("probe: feature width mismatch");
  return ((features.rowwise() - mean_.transpose()).array().rowwise() * scale_.transpose().array())
      .matrix();
}

Matrix LogisticProbe::scores(const Matrix& standardized) const {
  return (standardized * weights_.transpose()).rowwise() + bias_.transpose();
}

double LogisticProbe::accuracy(const Matrix& standardized,
                               const std::vector<std::uint32_t>& labels) const {
  const Matrix z = scores(standardized);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    hits += row_argmax(z, i) == labels[static_cast<std::size_t>(i)];
  return static_cast<double>(hits) / static_cast<double>(z.rows());
}

ExplainReport permutation_importance(const TrainedEnsemble& ensemble, const Dataset& train,
                                     const Dataset& eval, const ExplainOptions& options) {
  if (options.repeats == 0) fail_usage("explain: repeats must be positive");
  if (ensemble.members.empty()) fail_validation("explain: empty ensemble");
  if (options.place_type && !ensemble.is_shared() &&
      !ensemble.members.count(*options.place_type))
    fail_validation("explain: no ensemble member for place-type " +
                    std::to_string(options.place_type->value));

  const std::size_t nc = ensemble.members.begin()->second.num_categories();
  const auto blocks = enumerate_blocks(nc, options.max_subset);
  const FeatureTable tr = feature_table(ensemble, train, options.place_type, blocks, options.layer_index);
  const FeatureTable ev = feature_table(ensemble, eval, options.place_type, blocks, options.layer_index);

  std::size_t num_classes = ensemble.members.begin()->second.num_classes();
  const LogisticProbe probe = LogisticProbe::fit(tr.rows, tr.labels, num_classes, options.probe);
  const Matrix xtr = probe.standardize(tr.rows);
  const Matrix xev = probe.standardize(ev.rows);

  ExplainReport report;
  report.num_train = tr.labels.size();
  report.num_eval = ev.labels.size();
  report.probe_train_accuracy = probe.accuracy(xtr, tr.labels);
  report.probe_eval_accuracy = probe.accuracy(xev, ev.labels);

  const Matrix base_scores = probe.scores(xev);
  const Eigen::Index n = xev.rows();
  const Eigen::Index dim = xev.cols() / static_cast<Eigen::Index>(blocks.size());
  const Matrix& w = probe.weights();

  // Permutations are drawn up front so the result does not depend on threads.
  std::mt19937_64 rng(options.seed);
  std::vector<std::vector<std::vector<Eigen::Index>>> perms(blocks.size());
  for (auto& per_block : perms) {
    per_block.resize(options.repeats);
    for (auto& perm : per_block) {
      perm.resize(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      std::shuffle(perm.begin(), perm.end(), rng);
    }
  }

  report.ranking.resize(blocks.size());
  parallel_for(blocks.size(), [&](std::size_t b) {
    const Eigen::Index off = static_cast<Eigen::Index>(b) * dim;
    const Matrix wb = w.middleCols(off, dim);
    std::vector<double> accs;
    for (const auto& perm : perms[b]) {
      std::size_t hits = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        // Only this block's columns change, so update the scores by the
        // difference. An unchanged block yields an exactly zero delta.
        const Vector diff = (xev.row(perm[static_cast<std::size_t>(i)]).segment(off, dim) -
                             xev.row(i).segment(off, dim))
                                .transpose();
        Eigen::RowVectorXd z = base_scores.row(i);
        if (!diff.isZero(0.0)) z += (wb * diff).transpose();
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < z.size(); ++c)
          if (z(c) > z(best)) best = c;
        hits += static_cast<std::size_t>(best) == ev.labels[static_cast<std::size_t>(i)];
      }
      accs.push_back(static_cast<double>(hits) / static_cast<double>(n));
    }
    // Averaging the drops, not the accuracies, keeps an unchanged block at
    // exactly zero.
    double drop = 0.0;
    for (double a : accs) drop += report.probe_eval_accuracy - a;
    drop /= static_cast<double>(accs.size());
    double var = 0.0;
    for (double a : accs) {
      const double d = report.probe_eval_accuracy - a - drop;
      var += d * d;
    }
    var /= static_cast<double>(accs.size());
    auto& out = report.ranking[b];
    out.block = blocks[b];
    out.name = block_name(blocks[b], eval.category_names);
    out.importance = drop;
    out.stddev = std::sqrt(var);
  });
  std::stable_sort(report.ranking.begin(), report.ranking.end(),
                   [](const BlockImportance& a, const BlockImportance& b) {
                     return a.importance > b.importance;
                   });
  return report;
}

}  // namespace lucid
