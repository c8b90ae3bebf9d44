/*
 * Copyright 2026 The Lucid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to liblucid. Objects are opaque handles owned by the caller
 * and released with the matching *_free function. Every call that can fail
 * returns a lucid_status; the message for the most recent failure on the
 * calling thread is available from lucid_last_error(). Strings returned
 * through char** out-parameters are heap allocated and released with
 * lucid_string_free().
 */

#ifndef LUCID_LUCID_H
#define LUCID_LUCID_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LUCID_BUILDING_LIBRARY)
#    define LUCID_API __declspec(dllexport)
#  else
#    define LUCID_API __declspec(dllimport)
#  endif
#else
#  define LUCID_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lucid_status {
  LUCID_OK = 0,
  LUCID_ERR_USAGE = 1,     /* bad argument or option combination */
  LUCID_ERR_DATA = 2,      /* invalid input data, missing files, I/O */
  LUCID_ERR_NUMERICAL = 3, /* non-finite loss during training */
  LUCID_ERR_INTERNAL = 4
} lucid_status;

typedef enum lucid_strategy {
  LUCID_STRATEGY_OSFA = 0,
  LUCID_STRATEGY_PLACE_TYPE = 1,
  LUCID_STRATEGY_WDLR = 2,
  LUCID_STRATEGY_SDA = 3
} lucid_strategy;

typedef enum lucid_aggregation {
  LUCID_AGG_WEIGHTED_AVERAGE = 0,
  LUCID_AGG_MAJORITY_VOTE = 1
} lucid_aggregation;

typedef struct lucid_dataset lucid_dataset;
typedef struct lucid_ensemble lucid_ensemble;

LUCID_API const char* lucid_version(void);
LUCID_API const char* lucid_last_error(void);
LUCID_API void lucid_string_free(char* s);

/* Receives warnings (level 1) and progress notes (level 0). NULL restores
 * the default, which drops them. */
typedef void (*lucid_log_fn)(int level, const char* message, void* user);
LUCID_API void lucid_set_log_callback(lucid_log_fn fn, void* user);

/* ---- datasets ---------------------------------------------------------- */

LUCID_API lucid_status lucid_dataset_load(const char* manifest_path, lucid_dataset** out);
LUCID_API lucid_status lucid_dataset_save(const lucid_dataset* data, const char* directory);
LUCID_API void lucid_dataset_free(lucid_dataset* data);

LUCID_API size_t lucid_dataset_num_samples(const lucid_dataset* data);
LUCID_API size_t lucid_dataset_num_place_types(const lucid_dataset* data);
LUCID_API lucid_status lucid_dataset_place_type_index(const lucid_dataset* data,
                                                      const char* name, int32_t* out);

/* `benchmark` is "fig1" or the path of a JSON benchmark description. */
LUCID_API lucid_status lucid_dataset_generate(const char* benchmark, size_t samples_per_cell,
                                              uint64_t seed, lucid_dataset** out);

/* Stratified 60/20/20 split. Warnings about small strata go to the log. */
LUCID_API lucid_status lucid_dataset_split(const lucid_dataset* data, uint64_t seed,
                                           lucid_dataset** train, lucid_dataset** val,
                                           lucid_dataset** test);

/* Partitions at 0.2 / 0.8 and rotations by 16, 32, 48 degrees; resamples
 * every result to `sample_size` points unless it is 0. */
LUCID_API lucid_status lucid_dataset_augment(const lucid_dataset* data, size_t sample_size,
                                             uint64_t seed, lucid_dataset** out);

/* ---- training ---------------------------------------------------------- */

typedef struct lucid_train_options {
  int strategy; /* lucid_strategy */
  double base_lr;
  size_t epochs;
  uint64_t seed;
  size_t k_neighbors;
  double cutoff; /* <= 0: none */
  size_t num_layers;
  size_t hidden_dim;
  double leaky_slope;
  double alpha_threshold; /* <= 0: the dataset's threshold (wdlr) */
  size_t frozen_layers;   /* sda */
  double lambda;          /* sda */
  size_t finetune_epochs; /* sda; 0: same as epochs */
  size_t source_batch;    /* sda */
  int freeze_classifier;  /* sda diagnostic */
  int32_t target_place_type; /* -1: every place-type */
  int aggregation;           /* lucid_aggregation */
  int select_on_validation;
} lucid_train_options;

LUCID_API void lucid_train_options_init(lucid_train_options* options);

LUCID_API lucid_status lucid_train(const lucid_dataset* train, const lucid_dataset* val,
                                   const lucid_train_options* options, lucid_ensemble** out);

LUCID_API lucid_status lucid_ensemble_save(const lucid_ensemble* ensemble, const char* directory);
LUCID_API lucid_status lucid_ensemble_load(const char* directory, lucid_ensemble** out);
LUCID_API void lucid_ensemble_free(lucid_ensemble* ensemble);

LUCID_API lucid_status lucid_ensemble_set_metadata(lucid_ensemble* ensemble, const char* key,
                                                   const char* value);
LUCID_API lucid_status lucid_ensemble_options(const lucid_ensemble* ensemble,
                                              lucid_train_options* out);
/* JSON: strategy, members with sample counts, learning rates and selected epoch. */
LUCID_API lucid_status lucid_ensemble_summary(const lucid_ensemble* ensemble,
                                              const lucid_dataset* names, char** json);
/* CSV: epoch, member, phase, mean_loss, val_accuracy. */
LUCID_API lucid_status lucid_ensemble_training_log(const lucid_ensemble* ensemble,
                                                   const lucid_dataset* names, char** csv);

/* ---- evaluation -------------------------------------------------------- */

typedef struct lucid_metrics {
  double accuracy;
  double precision;
  double recall;
  double f1;
} lucid_metrics;

/* Per-sample routed evaluation. `json` may be NULL. */
LUCID_API lucid_status lucid_evaluate(const lucid_ensemble* ensemble, const lucid_dataset* data,
                                      lucid_metrics* metrics, char** json);

/* Samples sharing a group key are combined with `aggregation` first. */
LUCID_API lucid_status lucid_evaluate_groups(const lucid_ensemble* ensemble,
                                             const lucid_dataset* data, int aggregation,
                                             lucid_metrics* metrics, char** json);

/* CSV with one row per k = 0..num_layers, then "full_freeze" and
 * "pretrained": name,frozen_layers,classifier_frozen,accuracy,precision,recall,f1 */
LUCID_API lucid_status lucid_sweep_frozen(const lucid_dataset* train, const lucid_dataset* val,
                                          const lucid_dataset* test,
                                          const lucid_train_options* options, char** csv);

/* ---- explanation ------------------------------------------------------- */

typedef struct lucid_explain_options {
  int32_t place_type; /* -1: global */
  size_t repeats;
  uint64_t seed;
  size_t max_subset;
  int32_t layer_index; /* -1: last layer */
  double probe_l2;
} lucid_explain_options;

LUCID_API void lucid_explain_options_init(lucid_explain_options* options);

/* CSV: rank,center,neighbors,importance,std. Neighbours are space separated.
 * `probe_accuracy` (nullable) receives the probe's accuracy on `eval`. */
LUCID_API lucid_status lucid_explain(const lucid_ensemble* ensemble, const lucid_dataset* train,
                                     const lucid_dataset* eval,
                                     const lucid_explain_options* options, char** csv,
                                     double* probe_accuracy);

#ifdef __cplusplus
}
#endif

#endif /* LUCID_LUCID_H */
