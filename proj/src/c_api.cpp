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

#include "lucid/lucid.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lucid/datagen.hpp"
#include "lucid/error.hpp"
#include "lucid/explain.hpp"
#include "lucid/training.hpp"
#include "text_io.hpp"

#ifndef LUCID_VERSION_STRING
#define LUCID_VERSION_STRING "0.0.0"
#endif

struct lucid_dataset {
  lucid::Dataset data;
};

struct lucid_ensemble {
  lucid::TrainedEnsemble ensemble;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_log_mutex;
lucid_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

void log_message(int level, const std::string& message) {
  std::lock_guard lock(g_log_mutex);
  if (g_log_fn) g_log_fn(level, message.c_str(), g_log_user);
}

lucid_status fail(lucid_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class Fn>
lucid_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return LUCID_OK;
  } catch (const lucid::Error& e) {
    switch (e.kind()) {
      case lucid::ErrorKind::usage: return fail(LUCID_ERR_USAGE, e.what());
      case lucid::ErrorKind::validation: return fail(LUCID_ERR_DATA, e.what());
      case lucid::ErrorKind::numerical: return fail(LUCID_ERR_NUMERICAL, e.what());
    }
    return fail(LUCID_ERR_INTERNAL, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(LUCID_ERR_DATA, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LUCID_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LUCID_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LUCID_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) lucid::fail_usage(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lucid::StrategyConfig to_config(const lucid_train_options& o) {
  lucid::StrategyConfig c;
  switch (o.strategy) {
    case LUCID_STRATEGY_OSFA: c.kind = lucid::StrategyKind::osfa; break;
    case LUCID_STRATEGY_PLACE_TYPE: c.kind = lucid::StrategyKind::place_type; break;
    case LUCID_STRATEGY_WDLR: c.kind = lucid::StrategyKind::wdlr; break;
    case LUCID_STRATEGY_SDA: c.kind = lucid::StrategyKind::sda; break;
    default: lucid::fail_usage("unknown strategy code " + std::to_string(o.strategy));
  }
  c.base_lr = o.base_lr;
  c.epochs = o.epochs;
  c.seed = o.seed;
  c.k_neighbors = o.k_neighbors;
  if (o.cutoff > 0.0) c.cutoff = o.cutoff;
  c.num_layers = o.num_layers;
  c.hidden_dim = o.hidden_dim;
  c.leaky_slope = o.leaky_slope;
  if (o.alpha_threshold > 0.0) c.alpha_threshold = o.alpha_threshold;
  c.sda_frozen_layers = o.frozen_layers;
  c.sda_lambda = o.lambda;
  if (o.finetune_epochs > 0) c.sda_finetune_epochs = o.finetune_epochs;
  c.sda_source_batch = o.source_batch;
  c.sda_freeze_classifier = o.freeze_classifier != 0;
  if (o.target_place_type >= 0)
    c.target_place_type = lucid::PlaceTypeId(static_cast<std::uint32_t>(o.target_place_type));
  else if (o.target_place_type != -1)
    lucid::fail_usage("target place-type must be -1 or a place-type index");
  switch (o.aggregation) {
    case LUCID_AGG_WEIGHTED_AVERAGE: c.aggregation = lucid::Aggregation::weighted_average; break;
    case LUCID_AGG_MAJORITY_VOTE: c.aggregation = lucid::Aggregation::majority_vote; break;
    default: lucid::fail_usage("unknown aggregation code " + std::to_string(o.aggregation));
  }
  c.select_on_validation = o.select_on_validation != 0;
  return c;
}

lucid_train_options from_config(const lucid::StrategyConfig& c) {
  lucid_train_options o;
  lucid_train_options_init(&o);
  o.strategy = static_cast<int>(c.kind);
  o.base_lr = c.base_lr;
  o.epochs = c.epochs;
  o.seed = c.seed;
  o.k_neighbors = c.k_neighbors;
  o.cutoff = c.cutoff.value_or(0.0);
  o.num_layers = c.num_layers;
  o.hidden_dim = c.hidden_dim;
  o.leaky_slope = c.leaky_slope;
  o.alpha_threshold = c.alpha_threshold.value_or(0.0);
  o.frozen_layers = c.sda_frozen_layers;
  o.lambda = c.sda_lambda;
  o.finetune_epochs = c.sda_finetune_epochs.value_or(0);
  o.source_batch = c.sda_source_batch;
  o.freeze_classifier = c.sda_freeze_classifier ? 1 : 0;
  o.target_place_type = c.target_place_type ? static_cast<int32_t>(c.target_place_type->value) : -1;
  o.aggregation = c.aggregation == lucid::Aggregation::weighted_average ? LUCID_AGG_WEIGHTED_AVERAGE
                                                                        : LUCID_AGG_MAJORITY_VOTE;
  o.select_on_validation = c.select_on_validation ? 1 : 0;
  return o;
}

lucid::Aggregation to_aggregation(int code) {
  switch (code) {
    case LUCID_AGG_WEIGHTED_AVERAGE: return lucid::Aggregation::weighted_average;
    case LUCID_AGG_MAJORITY_VOTE: return lucid::Aggregation::majority_vote;
  }
  lucid::fail_usage("unknown aggregation code " + std::to_string(code));
}

void fill_metrics(const lucid::EvalReport& r, lucid_metrics* m) {
  if (!m) return;
  m->accuracy = r.accuracy;
  m->precision = r.precision;
  m->recall = r.recall;
  m->f1 = r.f1;
}

std::string place_label(const lucid::Dataset* names, lucid::PlaceTypeId p) {
  if (p == lucid::kSharedPlaceType) return "all";
  if (names && p.value < names->place_type_names.size()) return names->place_type_names[p.value];
  return std::to_string(p.value);
}

}  // namespace

extern "C" {

const char* lucid_version(void) { return LUCID_VERSION_STRING; }

const char* lucid_last_error(void) { return g_last_error.c_str(); }

void lucid_string_free(char* s) { std::free(s); }

void lucid_set_log_callback(lucid_log_fn fn, void* user) {
  std::lock_guard lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
}

lucid_status lucid_dataset_load(const char* manifest_path, lucid_dataset** out) {
  return guarded([&] {
    require(manifest_path, "manifest path");
    require(out, "out");
    *out = nullptr;
    auto d = std::make_unique<lucid_dataset>();
    d->data = lucid::load_dataset(manifest_path);
    *out = d.release();
  });
}

lucid_status lucid_dataset_save(const lucid_dataset* data, const char* directory) {
  return guarded([&] {
    require(data, "dataset");
    require(directory, "directory");
    lucid::save_dataset(data->data, directory);
  });
}

void lucid_dataset_free(lucid_dataset* data) { delete data; }

size_t lucid_dataset_num_samples(const lucid_dataset* data) {
  return data ? data->data.samples.size() : 0;
}

size_t lucid_dataset_num_place_types(const lucid_dataset* data) {
  return data ? data->data.num_place_types() : 0;
}

lucid_status lucid_dataset_place_type_index(const lucid_dataset* data, const char* name,
                                            int32_t* out) {
  return guarded([&] {
    require(data, "dataset");
    require(name, "name");
    require(out, "out");
    const auto& names = data->data.place_type_names;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) {
        *out = static_cast<int32_t>(i);
        return;
      }
    lucid::fail_usage(std::string("unknown place-type '") + name + "'");
  });
}

lucid_status lucid_dataset_generate(const char* benchmark, size_t samples_per_cell,
                                    uint64_t seed, lucid_dataset** out) {
  return guarded([&] {
    require(benchmark, "benchmark");
    require(out, "out");
    *out = nullptr;
    lucid::BenchmarkConfig config;
    if (std::string(benchmark) == "fig1") {
      config = lucid::fig1_benchmark();
    } else if (std::filesystem::is_regular_file(benchmark)) {
      config = lucid::parse_benchmark_config(lucid::text::read_file(benchmark));
    } else {
      lucid::fail_usage(std::string("unknown benchmark '") + benchmark +
                        "' (expected fig1 or a spec file)");
    }
    auto d = std::make_unique<lucid_dataset>();
    d->data = lucid::generate_benchmark(config, samples_per_cell, seed);
    *out = d.release();
  });
}

lucid_status lucid_dataset_split(const lucid_dataset* data, uint64_t seed, lucid_dataset** train,
                                 lucid_dataset** val, lucid_dataset** test) {
  return guarded([&] {
    require(data, "dataset");
    require(train, "train");
    require(val, "val");
    require(test, "test");
    *train = *val = *test = nullptr;
    const auto split = lucid::split_dataset(data->data, seed);
    for (const auto& w : split.warnings) log_message(1, w);
    auto tr = std::make_unique<lucid_dataset>();
    auto va = std::make_unique<lucid_dataset>();
    auto te = std::make_unique<lucid_dataset>();
    tr->data = data->data.subset(split.train);
    va->data = data->data.subset(split.val);
    te->data = data->data.subset(split.test);
    *train = tr.release();
    *val = va.release();
    *test = te.release();
  });
}

lucid_status lucid_dataset_augment(const lucid_dataset* data, size_t sample_size, uint64_t seed,
                                   lucid_dataset** out) {
  return guarded([&] {
    require(data, "dataset");
    require(out, "out");
    *out = nullptr;
    lucid::AugmentOptions options;
    options.seed = seed;
    if (sample_size > 0) options.sample_size = sample_size;
    auto result = lucid::augment_training_set(data->data, options);
    for (const auto& w : result.warnings) log_message(1, w);
    auto d = std::make_unique<lucid_dataset>();
    d->data = std::move(result.data);
    *out = d.release();
  });
}

void lucid_train_options_init(lucid_train_options* o) {
  if (!o) return;
  const lucid::StrategyConfig c;
  o->strategy = static_cast<int>(c.kind);
  o->base_lr = c.base_lr;
  o->epochs = c.epochs;
  o->seed = c.seed;
  o->k_neighbors = c.k_neighbors;
  o->cutoff = 0.0;
  o->num_layers = c.num_layers;
  o->hidden_dim = c.hidden_dim;
  o->leaky_slope = c.leaky_slope;
  o->alpha_threshold = 0.0;
  o->frozen_layers = c.sda_frozen_layers;
  o->lambda = c.sda_lambda;
  o->finetune_epochs = 0;
  o->source_batch = c.sda_source_batch;
  o->freeze_classifier = 0;
  o->target_place_type = -1;
  o->aggregation = LUCID_AGG_WEIGHTED_AVERAGE;
  o->select_on_validation = c.select_on_validation ? 1 : 0;
}

lucid_status lucid_train(const lucid_dataset* train, const lucid_dataset* val,
                         const lucid_train_options* options, lucid_ensemble** out) {
  return guarded([&] {
    require(train, "train dataset");
    require(val, "validation dataset");
    require(options, "options");
    require(out, "out");
    *out = nullptr;
    auto e = std::make_unique<lucid_ensemble>();
    e->ensemble = lucid::train(train->data, val->data, to_config(*options));
    *out = e.release();
  });
}

lucid_status lucid_ensemble_save(const lucid_ensemble* ensemble, const char* directory) {
  return guarded([&] {
    require(ensemble, "ensemble");
    require(directory, "directory");
    lucid::save_ensemble(ensemble->ensemble, directory);
  });
}

lucid_status lucid_ensemble_load(const char* directory, lucid_ensemble** out) {
  return guarded([&] {
    require(directory, "directory");
    require(out, "out");
    *out = nullptr;
    auto e = std::make_unique<lucid_ensemble>();
    e->ensemble = lucid::load_ensemble(directory);
    *out = e.release();
  });
}

void lucid_ensemble_free(lucid_ensemble* ensemble) { delete ensemble; }

lucid_status lucid_ensemble_set_metadata(lucid_ensemble* ensemble, const char* key,
                                         const char* value) {
  return guarded([&] {
    require(ensemble, "ensemble");
    require(key, "key");
    require(value, "value");
    ensemble->ensemble.metadata[key] = value;
  });
}

lucid_status lucid_ensemble_options(const lucid_ensemble* ensemble, lucid_train_options* out) {
  return guarded([&] {
    require(ensemble, "ensemble");
    require(out, "out");
    *out = from_config(ensemble->ensemble.config);
  });
}

lucid_status lucid_ensemble_summary(const lucid_ensemble* ensemble, const lucid_dataset* names,
                                    char** json) {
  return guarded([&] {
    require(ensemble, "ensemble");
    require(json, "json");
    *json = nullptr;
    const auto& e = ensemble->ensemble;
    const lucid::Dataset* nd = names ? &names->data : nullptr;
    nlohmann::ordered_json j;
    j["strategy"] = lucid::to_string(e.config.kind);
    j["seed"] = e.config.seed;
    nlohmann::ordered_json members = nlohmann::ordered_json::array();
    for (const auto& [key, params] : e.members) {
      nlohmann::ordered_json m;
      m["member"] = place_label(nd, key);
      m["num_layers"] = params.num_layers();
      if (auto it = e.summaries.find(key); it != e.summaries.end()) {
        m["num_samples"] = it->second.num_samples;
        m["learning_rates"] = it->second.learning_rates;
        m["selected_epoch"] = it->second.selected_epoch;
      }
      members.push_back(std::move(m));
    }
    j["members"] = std::move(members);
    *json = dup_string(j.dump(2) + "\n");
  });
}

lucid_status lucid_ensemble_training_log(const lucid_ensemble* ensemble,
                                         const lucid_dataset* names, char** csv) {
  return guarded([&] {
    require(ensemble, "ensemble");
    require(csv, "csv");
    *csv = nullptr;
    lucid::Dataset fallback;
    *csv = dup_string(lucid::format_training_log(ensemble->ensemble, names ? names->data : fallback));
  });
}

lucid_status lucid_evaluate(const lucid_ensemble* ensemble, const lucid_dataset* data,
                            lucid_metrics* metrics, char** json) {
  return guarded([&] {
    require(ensemble, "ensemble");
    require(data, "dataset");
    if (json) *json = nullptr;
    const auto report = lucid::evaluate(ensemble->ensemble, data->data);
    fill_metrics(report, metrics);
    if (json) *json = dup_string(lucid::report_to_json(report));
  });
}

lucid_status lucid_evaluate_groups(const lucid_ensemble* ensemble, const lucid_dataset* data,
                                   int aggregation, lucid_metrics* metrics, char** json) {
  return guarded([&] {
    require(ensemble, "ensemble");
    require(data, "dataset");
    if (json) *json = nullptr;
    const auto report =
        lucid::evaluate_groups(ensemble->ensemble, data->data, to_aggregation(aggregation));
    fill_metrics(report, metrics);
    if (json) *json = dup_string(lucid::report_to_json(report));
  });
}

lucid_status lucid_sweep_frozen(const lucid_dataset* train, const lucid_dataset* val,
                                const lucid_dataset* test, const lucid_train_options* options,
                                char** csv) {
  return guarded([&] {
    require(train, "train dataset");
    require(val, "validation dataset");
    require(test, "test dataset");
    require(options, "options");
    require(csv, "csv");
    *csv = nullptr;
    auto config = to_config(*options);
    if (config.kind != lucid::StrategyKind::sda)
      lucid::fail_usage("the frozen-layer sweep needs the sda strategy");
    config.sda_frozen_layers = 0;
    const auto rows = lucid::sweep_frozen_layers(train->data, val->data, test->data, config);
    std::ostringstream out;
    out << "name,frozen_layers,classifier_frozen,accuracy,precision,recall,f1\n";
    for (const auto& r : rows) {
      out << r.name << ',' << r.frozen_layers << ',' << (r.classifier_frozen ? 1 : 0) << ','
          << lucid::text::format_double(r.report.accuracy) << ','
          << lucid::text::format_double(r.report.precision) << ','
          << lucid::text::format_double(r.report.recall) << ','
          << lucid::text::format_double(r.report.f1) << '\n';
    }
    *csv = dup_string(out.str());
  });
}

void lucid_explain_options_init(lucid_explain_options* o) {
  if (!o) return;
  const lucid::ExplainOptions d;
  o->place_type = -1;
  o->repeats = d.repeats;
  o->seed = d.seed;
  o->max_subset = d.max_subset;
  o->layer_index = -1;
  o->probe_l2 = d.probe.l2;
}

lucid_status lucid_explain(const lucid_ensemble* ensemble, const lucid_dataset* train,
                           const lucid_dataset* eval, const lucid_explain_options* options,
                           char** csv, double* probe_accuracy) {
  return guarded([&] {
    require(ensemble, "ensemble");
    require(train, "train dataset");
    require(eval, "eval dataset");
    require(options, "options");
    require(csv, "csv");
    *csv = nullptr;
    lucid::ExplainOptions o;
    if (options->place_type >= 0)
      o.place_type = lucid::PlaceTypeId(static_cast<std::uint32_t>(options->place_type));
    o.repeats = options->repeats;
    o.seed = options->seed;
    o.max_subset = options->max_subset;
    if (options->layer_index >= 0) o.layer_index = static_cast<std::size_t>(options->layer_index);
    o.probe.l2 = options->probe_l2;
    if (!(o.probe.l2 >= 0.0) || !std::isfinite(o.probe.l2))
      lucid::fail_usage("probe L2 weight must be >= 0");

    const auto report = lucid::permutation_importance(ensemble->ensemble, train->data, eval->data, o);
    const auto& names = eval->data.category_names;
    std::ostringstream out;
    out << "rank,center,neighbors,importance,std\n";
    for (std::size_t i = 0; i < report.ranking.size(); ++i) {
      const auto& r = report.ranking[i];
      out << (i + 1) << ',' << names.at(r.block.center.value) << ',';
      for (std::size_t k = 0; k < r.block.neighbors.size(); ++k)
        out << (k ? " " : "") << names.at(r.block.neighbors[k].value);
      out << ',' << lucid::text::format_double(r.importance) << ','
          << lucid::text::format_double(r.stddev) << '\n';
    }
    *csv = dup_string(out.str());
    if (probe_accuracy) *probe_accuracy = report.probe_eval_accuracy;
  });
}

}  // extern "C"
