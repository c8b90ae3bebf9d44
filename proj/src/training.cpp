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

#include "lucid/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "lucid/error.hpp"
#include "parallel.hpp"

namespace lucid {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::osfa: return "osfa";
    case StrategyKind::place_type: return "place-type";
    case StrategyKind::wdlr: return "wdlr";
    case StrategyKind::sda: return "sda";
  }
  return "?";
}

std::string to_string(Aggregation mode) {
  return mode == Aggregation::weighted_average ? "weighted_average" : "majority_vote";
}

StrategyKind parse_strategy(const std::string& name) {
  if (name == "osfa") return StrategyKind::osfa;
  if (name == "place-type" || name == "place_type") return StrategyKind::place_type;
  if (name == "wdlr") return StrategyKind::wdlr;
  if (name == "sda") return StrategyKind::sda;
  fail_usage("unknown strategy '" + name + "' (expected osfa|place-type|wdlr|sda)");
}

Aggregation parse_aggregation(const std::string& name) {
  if (name == "weighted_average") return Aggregation::weighted_average;
  if (name == "majority_vote") return Aggregation::majority_vote;
  fail_usage("unknown aggregation '" + name + "' (expected weighted_average|majority_vote)");
}

void validate_config(const StrategyConfig& c) {
  if (!(c.base_lr > 0.0) || !std::isfinite(c.base_lr)) fail_usage("learning rate must be > 0");
  if (c.k_neighbors == 0) fail_usage("k_neighbors must be at least 1");
  if (c.cutoff && !(*c.cutoff > 0.0)) fail_usage("cutoff must be positive");
  if (c.hidden_dim == 0) fail_usage("hidden dimension must be at least 1");
  if (c.kind != StrategyKind::sda && c.sda_frozen_layers != 0)
    fail_usage("frozen layers only apply to the sda strategy");
  if (c.sda_frozen_layers > c.num_layers)
    fail_usage("frozen layer count " + std::to_string(c.sda_frozen_layers) +
               " exceeds the layer count " + std::to_string(c.num_layers));
  if (!(c.sda_lambda >= 0.0) || !std::isfinite(c.sda_lambda)) fail_usage("lambda must be >= 0");
  if (c.alpha_threshold && !(*c.alpha_threshold > 0.0)) fail_usage("threshold must be > 0");
}

double effective_learning_rate(double base_lr, double distance) {
  if (!(base_lr > 0.0)) fail_validation("base learning rate must be > 0");
  if (!(distance >= 1.0) || !std::isfinite(distance))
    fail_validation("place-type distance must be >= 1");
  return base_lr / distance;
}

std::vector<WeightedSample> select_training_samples(const Dataset& data, PlaceTypeId target,
                                                    const PlaceTypeDistanceMatrix& matrix) {
  if (target.value >= matrix.size()) fail_validation("target place-type out of range");
  std::vector<WeightedSample> out;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const double d = matrix(target, data.samples[i].place_type);
    if (d <= matrix.threshold()) out.push_back({i, d});
  }
  return out;
}

std::vector<KnnGraph> build_graphs(const Dataset& data, std::size_t k,
                                   std::optional<double> cutoff) {
  std::vector<KnnGraph> graphs(data.samples.size());
  parallel_for(graphs.size(), [&](std::size_t i) {
    graphs[i] = build_knn_graph(data.samples[i].points, k, cutoff);
  });
  return graphs;
}

namespace {

ModelShape shape_for(const Dataset& data, const StrategyConfig& c) {
  ModelShape s;
  s.num_categories = data.num_categories();
  s.num_classes = data.num_classes();
  s.embedding_dim = c.hidden_dim;
  s.hidden_dim = c.hidden_dim;
  s.num_layers = c.num_layers;
  s.leaky_slope = c.leaky_slope;
  return s;
}

std::size_t argmax(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return static_cast<std::size_t>(best);
}

struct GraphedData {
  const Dataset& data;
  std::vector<KnnGraph> graphs;
};

// Sources drawn for the representation-divergence term.
struct DivergenceSource {
  double lambda = 0.0;
  std::vector<Vector> representations;  // pre-trained pooled outputs, one per source sample
  std::size_t batch = 8;
};

struct MemberJob {
  PlaceTypeId member;
  PlaceTypeId param_key;
  std::string phase;
  ModelParams params;
  std::vector<std::pair<std::size_t, double>> samples;  // (train index, learning rate)
  std::vector<std::size_t> val;                         // val indices routed to this member
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  bool select_on_validation = true;
  GradientOptions options;
  std::optional<DivergenceSource> divergence;
};

struct MemberResult {
  ModelParams params;
  MemberSummary summary;
  std::vector<EpochRecord> log;
};

double member_accuracy(const ModelParams& params, PlaceTypeId key, const GraphedData& val,
                       std::span<const std::size_t> indices) {
  std::size_t correct = 0;
  for (auto i : indices) {
    const auto& s = val.data.samples[i];
    const auto t = model_forward(s, val.graphs[i], params, key);
    if (argmax(t.probabilities) == s.label.value) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

MemberResult run_member(MemberJob job, const GraphedData& train, const GraphedData& val) {
  const std::string member_name = train.data.place_type_name(job.member);
  // Shuffling starts from a canonical order so the input sample order never matters.
  std::sort(job.samples.begin(), job.samples.end(), [&](const auto& a, const auto& b) {
    return train.data.samples[a.first].sample_id < train.data.samples[b.first].sample_id;
  });
  std::mt19937_64 shuffle_rng(job.seed);
  std::mt19937_64 source_rng(job.seed ^ 0x9e3779b97f4a7c15ULL);

  MemberResult result;
  std::vector<double> rates;
  for (const auto& [_, lr] : job.samples) rates.push_back(lr);
  std::sort(rates.begin(), rates.end(), std::greater<>());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
  result.summary.learning_rates = rates;
  result.summary.num_samples = job.samples.size();

  const bool use_val = job.select_on_validation && !job.val.empty();
  ModelParams best = job.params;
  double best_acc = use_val ? member_accuracy(job.params, job.param_key, val, job.val) : 0.0;

  std::vector<std::size_t> source_order;
  if (job.divergence) {
    source_order.resize(job.divergence->representations.size());
    std::iota(source_order.begin(), source_order.end(), std::size_t{0});
  }

  for (std::size_t epoch = 1; epoch <= job.epochs; ++epoch) {
    std::shuffle(job.samples.begin(), job.samples.end(), shuffle_rng);

    GradientOptions options = job.options;
    if (job.divergence && !source_order.empty()) {
      std::shuffle(source_order.begin(), source_order.end(), source_rng);
      const std::size_t take = std::min(job.divergence->batch, source_order.size());
      Vector anchor = Vector::Zero(job.divergence->representations.front().size());
      for (std::size_t b = 0; b < take; ++b)
        anchor += job.divergence->representations[source_order[b]];
      anchor /= static_cast<double>(take);
      options.penalty = RepresentationPenalty{std::move(anchor), job.divergence->lambda};
    }

    double total = 0.0;
    for (const auto& [index, lr] : job.samples) {
      const auto& sample = train.data.samples[index];
      try {
        auto lg = loss_and_gradients(sample, train.graphs[index], job.params, job.param_key,
                                     sample.label, options);
        total += lg.loss;
        job.params = sgd_step(std::move(job.params), lg.grads, lr);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::numerical) throw;
        fail_numerical("member " + member_name + " (" + job.phase + ") diverged at epoch " +
                       std::to_string(epoch) + ": " + e.what());
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.member = job.member;
    rec.phase = job.phase;
    rec.mean_loss = job.samples.empty() ? 0.0 : total / static_cast<double>(job.samples.size());
    if (!std::isfinite(rec.mean_loss))
      fail_numerical("member " + member_name + " diverged at epoch " + std::to_string(epoch));
    if (!job.val.empty()) {
      rec.val_accuracy = member_accuracy(job.params, job.param_key, val, job.val);
      if (use_val && *rec.val_accuracy > best_acc) {
        best_acc = *rec.val_accuracy;
        best = job.params;
        result.summary.selected_epoch = epoch;
      }
    }
    result.log.push_back(rec);
  }

  if (use_val) {
    result.params = std::move(best);
  } else {
    result.params = std::move(job.params);
    result.summary.selected_epoch = job.epochs;
  }
  return result;
}

std::vector<std::size_t> indices_of_place_type(const Dataset& data, PlaceTypeId p) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.samples.size(); ++i)
    if (data.samples[i].place_type == p) out.push_back(i);
  return out;
}

std::vector<std::size_t> all_indices(const Dataset& data) {
  std::vector<std::size_t> out(data.samples.size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

std::vector<PlaceTypeId> target_members(const Dataset& train, const StrategyConfig& config) {
  std::vector<PlaceTypeId> targets;
  if (config.target_place_type) {
    if (config.target_place_type->value >= train.num_place_types())
      fail_usage("target place-type out of range");
    targets.push_back(*config.target_place_type);
  } else {
    for (std::uint32_t p = 0; p < train.num_place_types(); ++p) targets.emplace_back(p);
  }
  return targets;
}

TrainedEnsemble assemble(const StrategyConfig& config, std::vector<MemberResult> results,
                         std::span<const PlaceTypeId> keys) {
  TrainedEnsemble e;
  e.config = config;
  for (std::size_t i = 0; i < results.size(); ++i) {
    e.members.emplace(keys[i], std::move(results[i].params));
    e.summaries.emplace(keys[i], results[i].summary);
    for (auto& r : results[i].log) e.training_log.push_back(std::move(r));
  }
  return e;
}

void require_samples(const Dataset& train) {
  validate_dataset(train);
  if (train.samples.empty()) fail_validation("training split is empty");
}

MemberResult pretrain_shared(const GraphedData& train, const GraphedData& val,
                             const StrategyConfig& config, const std::string& phase) {
  MemberJob job;
  job.member = kSharedPlaceType;
  job.param_key = kSharedPlaceType;
  job.phase = phase;
  const PlaceTypeId key = kSharedPlaceType;
  job.params = init_model(shape_for(train.data, config), std::span(&key, 1), config.seed);
  for (auto i : all_indices(train.data)) job.samples.emplace_back(i, config.base_lr);
  job.val = all_indices(val.data);
  job.epochs = config.epochs;
  job.seed = config.seed;
  job.select_on_validation = config.select_on_validation;
  return run_member(std::move(job), train, val);
}

TrainedEnsemble train_per_place(const Dataset& train, const Dataset& val,
                                const StrategyConfig& config, bool weighted) {
  validate_config(config);
  require_samples(train);
  GraphedData tg{train, build_graphs(train, config.k_neighbors, config.cutoff)};
  GraphedData vg{val, build_graphs(val, config.k_neighbors, config.cutoff)};

  PlaceTypeDistanceMatrix matrix = train.distance_matrix;
  if (weighted && config.alpha_threshold)
    matrix = validate_distance_matrix(matrix.entries(), *config.alpha_threshold);

  const auto targets = target_members(train, config);
  std::vector<MemberJob> jobs;
  for (auto p : targets) {
    MemberJob job;
    job.member = p;
    job.param_key = p;
    job.phase = "train";
    job.params = init_model(shape_for(train, config), std::span(&p, 1), config.seed);
    if (weighted) {
      for (const auto& ws : select_training_samples(train, p, matrix))
        job.samples.emplace_back(ws.index, effective_learning_rate(config.base_lr, ws.distance));
    } else {
      for (auto i : indices_of_place_type(train, p)) job.samples.emplace_back(i, config.base_lr);
    }
    if (job.samples.empty())
      fail_validation("place-type '" + train.place_type_name(p) + "' has no training samples");
    job.val = indices_of_place_type(val, p);
    job.epochs = config.epochs;
    job.seed = config.seed;
    job.select_on_validation = config.select_on_validation;
    jobs.push_back(std::move(job));
  }

  std::vector<MemberResult> results(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) { results[i] = run_member(std::move(jobs[i]), tg, vg); });
  return assemble(config, std::move(results), targets);
}

ModelParams fine_tune_graphed(const ModelParams& pretrained, const GraphedData& train,
                              const GraphedData& val, PlaceTypeId target,
                              const StrategyConfig& config, const FineTuneOptions& options,
                              std::vector<EpochRecord>* log, MemberSummary* summary) {
  if (options.frozen_layers > pretrained.num_layers())
    fail_usage("frozen layer count exceeds the layer count");
  MemberJob job;
  job.member = target;
  job.param_key = target;
  job.phase = "finetune";
  job.params = rekey(pretrained, kSharedPlaceType, target);
  for (auto i : indices_of_place_type(train.data, target))
    job.samples.emplace_back(i, config.base_lr);
  if (job.samples.empty())
    fail_validation("place-type '" + train.data.place_type_name(target) +
                    "' has no training samples");
  job.val = indices_of_place_type(val.data, target);
  job.epochs = config.sda_finetune_epochs.value_or(config.epochs);
  job.seed = config.seed;
  job.select_on_validation = config.select_on_validation;
  job.options.frozen_layers = options.frozen_layers;
  job.options.freeze_classifier = options.freeze_classifier;
  if (options.lambda) {
    DivergenceSource src;
    src.lambda = *options.lambda;
    src.batch = std::max<std::size_t>(1, config.sda_source_batch);
    // Canonical order so the batches drawn later do not depend on input order.
    std::vector<std::size_t> sources;
    for (std::size_t i = 0; i < train.data.samples.size(); ++i)
      if (train.data.samples[i].place_type != target) sources.push_back(i);
    std::sort(sources.begin(), sources.end(), [&](std::size_t a, std::size_t b) {
      return train.data.samples[a].sample_id < train.data.samples[b].sample_id;
    });
    for (auto i : sources)
      src.representations.push_back(
          model_forward(train.data.samples[i], train.graphs[i], pretrained, kSharedPlaceType)
              .pooled);
    job.divergence = std::move(src);
  }
  auto result = run_member(std::move(job), train, val);
  if (log) log->insert(log->end(), result.log.begin(), result.log.end());
  if (summary) *summary = result.summary;
  return std::move(result.params);
}

}  // namespace

TrainedEnsemble train_osfa(const Dataset& train, const Dataset& val, const StrategyConfig& config) {
  validate_config(config);
  require_samples(train);
  GraphedData tg{train, build_graphs(train, config.k_neighbors, config.cutoff)};
  GraphedData vg{val, build_graphs(val, config.k_neighbors, config.cutoff)};
  std::vector<MemberResult> results;
  results.push_back(pretrain_shared(tg, vg, config, "train"));
  const PlaceTypeId key = kSharedPlaceType;
  return assemble(config, std::move(results), std::span(&key, 1));
}

TrainedEnsemble train_place_type(const Dataset& train, const Dataset& val,
                                 const StrategyConfig& config) {
  return train_per_place(train, val, config, false);
}

TrainedEnsemble train_wdlr(const Dataset& train, const Dataset& val, const StrategyConfig& config) {
  return train_per_place(train, val, config, true);
}

ModelParams fine_tune(const ModelParams& pretrained, const Dataset& train, const Dataset& val,
                      PlaceTypeId target, const StrategyConfig& config,
                      const FineTuneOptions& options, std::vector<EpochRecord>* log) {
  validate_config(config);
  require_samples(train);
  GraphedData tg{train, build_graphs(train, config.k_neighbors, config.cutoff)};
  GraphedData vg{val, build_graphs(val, config.k_neighbors, config.cutoff)};
  return fine_tune_graphed(pretrained, tg, vg, target, config, options, log, nullptr);
}

TrainedEnsemble train_sda(const Dataset& train, const Dataset& val, const StrategyConfig& config) {
  validate_config(config);
  require_samples(train);
  GraphedData tg{train, build_graphs(train, config.k_neighbors, config.cutoff)};
  GraphedData vg{val, build_graphs(val, config.k_neighbors, config.cutoff)};

  MemberResult pre = pretrain_shared(tg, vg, config, "pretrain");
  const auto targets = target_members(train, config);

  FineTuneOptions options;
  options.frozen_layers = config.sda_frozen_layers;
  options.freeze_classifier = config.sda_freeze_classifier;
  options.lambda = config.sda_lambda;

  std::vector<MemberResult> results(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    results[i].params = fine_tune_graphed(pre.params, tg, vg, targets[i], config, options,
                                          &results[i].log, &results[i].summary);
  });
  TrainedEnsemble e = assemble(config, std::move(results), targets);
  e.training_log.insert(e.training_log.begin(), pre.log.begin(), pre.log.end());
  return e;
}

std::vector<SweepRow> sweep_frozen_layers(const Dataset& train, const Dataset& val,
                                          const Dataset& test, const StrategyConfig& config) {
  validate_config(config);
  require_samples(train);
  GraphedData tg{train, build_graphs(train, config.k_neighbors, config.cutoff)};
  GraphedData vg{val, build_graphs(val, config.k_neighbors, config.cutoff)};
  MemberResult pre = pretrain_shared(tg, vg, config, "pretrain");
  const auto targets = target_members(train, config);

  auto run = [&](std::size_t k, bool freeze_classifier) {
    FineTuneOptions options;
    options.frozen_layers = k;
    options.freeze_classifier = freeze_classifier;
    options.lambda = config.sda_lambda;
    std::vector<MemberResult> results(targets.size());
    parallel_for(targets.size(), [&](std::size_t i) {
      results[i].params = fine_tune_graphed(pre.params, tg, vg, targets[i], config, options,
                                            nullptr, nullptr);
    });
    return evaluate(assemble(config, std::move(results), targets), test);
  };

  std::vector<SweepRow> rows;
  const std::size_t n = config.num_layers;
  for (std::size_t k = 0; k <= n; ++k) rows.push_back({"k=" + std::to_string(k), k, false, run(k, false)});
  rows.push_back({"full_freeze", n, true, run(n, true)});

  TrainedEnsemble shared;
  shared.config = config;
  shared.members.emplace(kSharedPlaceType, pre.params);
  rows.push_back({"pretrained", n, true, evaluate(shared, test)});
  return rows;
}

TrainedEnsemble train(const Dataset& train_set, const Dataset& val, const StrategyConfig& config) {
  switch (config.kind) {
    case StrategyKind::osfa: return train_osfa(train_set, val, config);
    case StrategyKind::place_type: return train_place_type(train_set, val, config);
    case StrategyKind::wdlr: return train_wdlr(train_set, val, config);
    case StrategyKind::sda: return train_sda(train_set, val, config);
  }
  fail_usage("unknown strategy");
}

Prediction aggregate_predictions(const TrainedEnsemble& ensemble,
                                 const MultiCategoryPointSet& sample, const KnnGraph& graph) {
  PlaceTypeId key = sample.place_type;
  auto it = ensemble.members.find(kSharedPlaceType);
  if (it == ensemble.members.end()) {
    it = ensemble.members.find(sample.place_type);
    if (it == ensemble.members.end())
      fail_validation("sample '" + sample.sample_id + "': no ensemble member for place-type " +
                      std::to_string(sample.place_type.value));
  } else {
    key = kSharedPlaceType;
  }
  auto t = model_forward(sample, graph, it->second, key);
  return {ClassId(static_cast<std::uint32_t>(argmax(t.probabilities))), std::move(t.probabilities)};
}

ClassId combine_predictions(std::span<const Vector> probabilities, Aggregation mode) {
  if (probabilities.empty()) fail_validation("nothing to aggregate");
  const auto k = probabilities.front().size();
  if (mode == Aggregation::weighted_average) {
    Vector mean = Vector::Zero(k);
    for (const auto& p : probabilities) mean += p;
    mean /= static_cast<double>(probabilities.size());
    return ClassId(static_cast<std::uint32_t>(argmax(mean)));
  }
  Vector votes = Vector::Zero(k);
  for (const auto& p : probabilities) votes(static_cast<Eigen::Index>(argmax(p))) += 1.0;
  return ClassId(static_cast<std::uint32_t>(argmax(votes)));
}

namespace {

std::size_t class_count(const TrainedEnsemble& ensemble, const Dataset& test) {
  std::size_t k = test.num_classes();
  for (const auto& [_, m] : ensemble.members) k = std::max(k, m.num_classes());
  return k;
}

std::vector<Prediction> predict_all(const TrainedEnsemble& ensemble, const Dataset& test) {
  if (test.samples.empty()) fail_validation("evaluation split is empty");
  const auto graphs = build_graphs(test, ensemble.config.k_neighbors, ensemble.config.cutoff);
  std::vector<Prediction> out(test.samples.size());
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = aggregate_predictions(ensemble, test.samples[i], graphs[i]);
  });
  return out;
}

}  // namespace

EvalReport evaluate(const TrainedEnsemble& ensemble, const Dataset& test) {
  const auto preds = predict_all(ensemble, test);
  const auto k = class_count(ensemble, test);
  std::vector<std::vector<std::size_t>> confusion(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < preds.size(); ++i)
    ++confusion[test.samples[i].label.value][preds[i].label.value];
  return report_from_confusion(confusion);
}

std::string group_key(const std::string& sample_id) {
  auto pos = sample_id.find(':');
  return pos == std::string::npos ? sample_id : sample_id.substr(0, pos);
}

EvalReport evaluate_groups(const TrainedEnsemble& ensemble, const Dataset& test,
                           Aggregation mode) {
  const auto preds = predict_all(ensemble, test);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < test.samples.size(); ++i)
    groups[group_key(test.samples[i].sample_id)].push_back(i);
  const auto k = class_count(ensemble, test);
  std::vector<std::vector<std::size_t>> confusion(k, std::vector<std::size_t>(k, 0));
  for (const auto& [name, members] : groups) {
    const auto label = test.samples[members.front()].label;
    std::vector<Vector> probs;
    for (auto i : members) {
      if (test.samples[i].label != label)
        fail_validation("group '" + name + "' mixes class labels");
      probs.push_back(preds[i].probabilities);
    }
    ++confusion[label.value][combine_predictions(probs, mode).value];
  }
  return report_from_confusion(confusion);
}

DatasetSplit split_dataset(const Dataset& data, std::uint64_t seed) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < data.samples.size(); ++i)
    strata[{data.samples[i].place_type.value, data.samples[i].label.value}].push_back(i);

  DatasetSplit split;
  std::mt19937_64 rng(seed);
  for (auto& [key, members] : strata) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return data.samples[a].sample_id < data.samples[b].sample_id;
    });
    std::shuffle(members.begin(), members.end(), rng);

    // 60/20/20 quotas in fifths; leftovers go to the largest remainders,
    // earlier splits first on ties.
    const std::size_t n = members.size();
    std::size_t counts[3] = {3 * n / 5, n / 5, n / 5};
    std::size_t rems[3] = {3 * n % 5, n % 5, n % 5};
    std::size_t left = n - counts[0] - counts[1] - counts[2];
    while (left > 0) {
      std::size_t pick = 0;
      for (std::size_t j = 1; j < 3; ++j)
        if (rems[j] > rems[pick]) pick = j;
      ++counts[pick];
      rems[pick] = 0;
      --left;
    }
    if (counts[0] == 0 || counts[1] == 0 || counts[2] == 0) {
      std::ostringstream msg;
      msg << "stratum (place-type " << data.place_type_name(PlaceTypeId(key.first)) << ", label "
          << key.second << ") has " << n << " samples; some splits get none";
      split.warnings.push_back(msg.str());
    }
    std::size_t pos = 0;
    for (std::size_t j = 0; j < counts[0]; ++j) split.train.push_back(members[pos++]);
    for (std::size_t j = 0; j < counts[1]; ++j) split.val.push_back(members[pos++]);
    for (std::size_t j = 0; j < counts[2]; ++j) split.test.push_back(members[pos++]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace lucid
