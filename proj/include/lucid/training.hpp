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

// Training strategies over a place-type ensemble.
//
//   osfa        one model, one shared W/B key, every training sample
//   place_type  one model per place-type, trained on that place-type only
//   wdlr        one model per place-type; samples within the distance
//               threshold contribute with learning rate base_lr / distance
//   sda         pre-train a shared model, then per place-type freeze the
//               first k message-passing layers and fine-tune the rest
//
// Every member is a pure function of (training data, config.seed). Members
// train independently and may run on separate threads.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lucid/core_data.hpp"
#include "lucid/graph.hpp"
#include "lucid/metrics.hpp"
#include "lucid/network.hpp"

namespace lucid {

enum class StrategyKind { osfa, place_type, wdlr, sda };
enum class Aggregation { weighted_average, majority_vote };

std::string to_string(StrategyKind kind);
std::string to_string(Aggregation mode);
StrategyKind parse_strategy(const std::string& name);
Aggregation parse_aggregation(const std::string& name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::place_type;
  double base_lr = 1e-3;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  std::size_t k_neighbors = 10;
  std::optional<double> cutoff;

  // Architecture. Category and class counts come from the data.
  std::size_t num_layers = 4;
  std::size_t hidden_dim = 32;
  double leaky_slope = 0.01;

  /// Overrides the dataset's distance threshold when set (wdlr only).
  std::optional<double> alpha_threshold;

  std::size_t sda_frozen_layers = 0;
  double sda_lambda = 1.0;
  /// Fine-tuning epochs; defaults to `epochs`.
  std::optional<std::size_t> sda_finetune_epochs;
  std::size_t sda_source_batch = 8;
  /// Diagnostic: also freeze the classifier during fine-tuning.
  bool sda_freeze_classifier = false;

  /// Train only this member (place_type, wdlr, sda).
  std::optional<PlaceTypeId> target_place_type;
  Aggregation aggregation = Aggregation::weighted_average;
  /// Keep the epoch with the best validation accuracy (earliest on ties).
  bool select_on_validation = true;

  friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

/// Throws Error(usage) for settings that do not fit together.
void validate_config(const StrategyConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  ///< 1-based
  PlaceTypeId member;
  std::string phase;  ///< "train", "pretrain" or "finetune"
  double mean_loss = 0.0;
  std::optional<double> val_accuracy;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct MemberSummary {
  std::size_t num_samples = 0;
  /// Distinct per-sample learning rates used, largest first.
  std::vector<double> learning_rates;
  std::size_t selected_epoch = 0;  ///< 0 means the initial parameters

  friend bool operator==(const MemberSummary&, const MemberSummary&) = default;
};

struct TrainedEnsemble {
  std::map<PlaceTypeId, ModelParams> members;
  std::map<PlaceTypeId, MemberSummary> summaries;
  StrategyConfig config;
  std::vector<EpochRecord> training_log;
  /// Free-form single-token pairs carried through save/load (run provenance).
  std::map<std::string, std::string> metadata;

  bool is_shared() const { return members.count(kSharedPlaceType) != 0; }
};

double effective_learning_rate(double base_lr, double distance);

struct WeightedSample {
  std::size_t index;  ///< into data.samples
  double distance;
};

/// Every sample whose place-type lies within matrix.threshold() of `target`.
std::vector<WeightedSample> select_training_samples(const Dataset& data, PlaceTypeId target,
                                                    const PlaceTypeDistanceMatrix& matrix);

std::vector<KnnGraph> build_graphs(const Dataset& data, std::size_t k,
                                   std::optional<double> cutoff);

TrainedEnsemble train_osfa(const Dataset& train, const Dataset& val, const StrategyConfig& config);
TrainedEnsemble train_place_type(const Dataset& train, const Dataset& val,
                                 const StrategyConfig& config);
TrainedEnsemble train_wdlr(const Dataset& train, const Dataset& val, const StrategyConfig& config);
TrainedEnsemble train_sda(const Dataset& train, const Dataset& val, const StrategyConfig& config);
/// Dispatches on config.kind.
TrainedEnsemble train(const Dataset& train, const Dataset& val, const StrategyConfig& config);

struct FineTuneOptions {
  std::size_t frozen_layers = 0;
  bool freeze_classifier = false;
  /// Weight of the representation-divergence term; nullopt disables it.
  std::optional<double> lambda;
};

/// SDA phase two for one target place-type, starting from `pretrained`
/// (stored under kSharedPlaceType). The result is keyed by `target`.
ModelParams fine_tune(const ModelParams& pretrained, const Dataset& train, const Dataset& val,
                      PlaceTypeId target, const StrategyConfig& config,
                      const FineTuneOptions& options,
                      std::vector<EpochRecord>* log = nullptr);

struct SweepRow {
  std::string name;  ///< "k=<n>", "full_freeze" or "pretrained"
  std::size_t frozen_layers = 0;
  bool classifier_frozen = false;
  EvalReport report;
};

/// Pre-trains once, then fine-tunes every place-type member with k = 0..N
/// frozen layers and evaluates each ensemble on `test`. Two diagnostic rows
/// follow: k = N with the classifier frozen too, and the pre-trained model.
std::vector<SweepRow> sweep_frozen_layers(const Dataset& train, const Dataset& val,
                                          const Dataset& test, const StrategyConfig& config);

struct Prediction {
  ClassId label;
  Vector probabilities;
};

/// Routes the sample to the member for its place-type (or the shared member).
Prediction aggregate_predictions(const TrainedEnsemble& ensemble,
                                 const MultiCategoryPointSet& sample, const KnnGraph& graph);

/// Combines several per-sample probability vectors into one class.
ClassId combine_predictions(std::span<const Vector> probabilities, Aggregation mode);

/// Support-weighted metrics over routed per-sample predictions.
EvalReport evaluate(const TrainedEnsemble& ensemble, const Dataset& test);

/// Group-level report: samples sharing a group key (the sample id up to its
/// first ':'; the whole id when there is none) are combined with `mode`.
EvalReport evaluate_groups(const TrainedEnsemble& ensemble, const Dataset& test,
                           Aggregation mode);
std::string group_key(const std::string& sample_id);

struct DatasetSplit {
  std::vector<std::size_t> train, val, test;
  std::vector<std::string> warnings;
};

/// 60/20/20 per (place-type, label) stratum, largest-remainder rounding.
DatasetSplit split_dataset(const Dataset& data, std::uint64_t seed);

/// One model file per member plus index.json (config + member list) and
/// training_log.csv.
void save_ensemble(const TrainedEnsemble& ensemble, const std::filesystem::path& directory);
TrainedEnsemble load_ensemble(const std::filesystem::path& directory);

std::string format_training_log(const TrainedEnsemble& ensemble, const Dataset& data);

}  // namespace lucid
