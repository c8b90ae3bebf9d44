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

// lucid: generate, train, eval, sweep-frozen, explain, replay.
//
// Exit codes: 0 success, 1 usage, 2 data validation or I/O, 3 numerical
// failure, 4 internal error. Logs go to stderr; every output file is written
// to a temporary name and renamed into place. Each run leaves a
// run_manifest.json that `lucid replay` re-executes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lucid/lucid.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Failure {
  int code;
  std::string message;
};

void check(lucid_status s) {
  if (s != LUCID_OK) throw Failure{static_cast<int>(s), lucid_last_error()};
}

[[noreturn]] void usage_error(const std::string& message) { throw Failure{kExitUsage, message}; }

struct DatasetDeleter {
  void operator()(lucid_dataset* d) const { lucid_dataset_free(d); }
};
struct EnsembleDeleter {
  void operator()(lucid_ensemble* e) const { lucid_ensemble_free(e); }
};
struct StringDeleter {
  void operator()(char* s) const { lucid_string_free(s); }
};
using DatasetPtr = std::unique_ptr<lucid_dataset, DatasetDeleter>;
using EnsemblePtr = std::unique_ptr<lucid_ensemble, EnsembleDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

void log_line(const std::string& s) { std::cerr << "lucid: " << s << '\n'; }

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Failure{kExitData, "cannot write " + tmp.string()};
    out << content;
    if (!out) throw Failure{kExitData, "write failed for " + tmp.string()};
  }
  fs::rename(tmp, path);
}

fs::path manifest_path(const std::string& data) {
  fs::path p(data);
  return fs::is_directory(p) ? p / "manifest.txt" : p;
}

DatasetPtr load_data(const std::string& path) {
  lucid_dataset* d = nullptr;
  check(lucid_dataset_load(manifest_path(path).string().c_str(), &d));
  return DatasetPtr(d);
}

struct Splits {
  DatasetPtr train, val, test;
};

Splits split_data(const lucid_dataset* data, std::uint64_t seed) {
  lucid_dataset *tr = nullptr, *va = nullptr, *te = nullptr;
  check(lucid_dataset_split(data, seed, &tr, &va, &te));
  return {DatasetPtr(tr), DatasetPtr(va), DatasetPtr(te)};
}

std::string take(char* s) {
  StringPtr holder(s);
  return s ? std::string(s) : std::string();
}

// Run provenance: every option of the subcommand with its resolved value.
struct RunRecord {
  std::string command;
  std::vector<std::string> args;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
};

RunRecord record_of(const CLI::App& sub) {
  RunRecord r;
  r.command = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name(false, true);
    if (name.empty() || name == "--help" || name == "-h") continue;
    std::string flag = opt->get_lnames().empty() ? std::string() : "--" + opt->get_lnames().front();
    const bool positional = flag.empty();
    if (opt->get_type_size() == 0) {  // boolean flag
      if (opt->count() > 0) {
        r.args.push_back(flag);
        r.config[flag.substr(2)] = true;
      }
      continue;
    }
    // The config shows every resolved value; args hold only what was given,
    // which is what a replay passes back in.
    const bool given = opt->count() > 0;
    std::vector<std::string> values = opt->results();
    if (!given && !opt->get_default_str().empty()) values.push_back(opt->get_default_str());
    if (values.empty()) continue;
    const std::string key = positional ? opt->get_name() : flag.substr(2);
    r.config[key] = values.size() == 1 ? json(values.front()) : json(values);
    if (!given) continue;
    for (const auto& v : values) {
      if (!positional) r.args.push_back(flag);
      r.args.push_back(v);
    }
  }
  return r;
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_run_manifest(const fs::path& path, const RunRecord& r, double seconds) {
  json j;
  j["command"] = r.command;
  j["args"] = r.args;
  j["working_directory"] = fs::current_path().string();
  j["config"] = r.config;
  j["seed"] = r.seed;
  j["inputs"] = r.inputs;
  j["outputs"] = r.outputs;
  j["library_version"] = lucid_version();
  j["started_at"] = utc_timestamp();
  j["wall_clock_seconds"] = seconds;
  write_atomic(path, j.dump(2) + "\n");
}

// ---- option bundles -----------------------------------------------------

struct TrainFlags {
  std::string strategy;
  double lr = 1e-3;
  std::size_t epochs = 50;
  std::size_t k_neighbors = 10;
  double cutoff = 0.0;
  double alpha_threshold = 0.0;
  std::size_t frozen_layers = 0;
  double lambda = 1.0;
  std::size_t finetune_epochs = 0;
  std::size_t source_batch = 8;
  std::uint64_t seed = 0;
  std::size_t layers = 4;
  std::size_t hidden = 32;
  std::string place_type;
  bool no_select = false;
  bool augment = false;
  std::size_t augment_points = 0;
  std::string data;
  std::string out;
  CLI::Option* frozen_opt = nullptr;
};

void add_train_flags(CLI::App* sub, TrainFlags& f, bool strategy_required) {
  auto* s = sub->add_option("--strategy", f.strategy, "osfa | place-type | wdlr | sda");
  if (strategy_required) s->required();
  sub->add_option("--lr", f.lr, "base learning rate");
  sub->add_option("--epochs", f.epochs, "training epochs");
  sub->add_option("--k-neighbors", f.k_neighbors, "neighbours per point");
  sub->add_option("--cutoff", f.cutoff, "neighbour distance cutoff (0 = none)");
  sub->add_option("--alpha-threshold", f.alpha_threshold,
                  "place-type distance threshold for wdlr (0 = dataset value)");
  f.frozen_opt = sub->add_option("--frozen-layers", f.frozen_layers, "sda: frozen layers");
  sub->add_option("--lambda", f.lambda, "sda: representation divergence weight");
  sub->add_option("--finetune-epochs", f.finetune_epochs, "sda: fine-tuning epochs (0 = --epochs)");
  sub->add_option("--source-batch", f.source_batch, "sda: source samples per divergence anchor");
  sub->add_option("--seed", f.seed, "seed for splits, initialisation and shuffling");
  sub->add_option("--layers", f.layers, "message-passing layers");
  sub->add_option("--hidden", f.hidden, "hidden width");
  sub->add_option("--place-type", f.place_type, "train only this place-type's member");
  sub->add_flag("--no-select", f.no_select, "keep the last epoch instead of the best validation epoch");
  sub->add_flag("--augment", f.augment, "augment the training split");
  sub->add_option("--augment-points", f.augment_points, "resample augmented sets to N points (0 = off)");
  sub->add_option("--data", f.data, "dataset directory or manifest")->required();
  sub->add_option("--out", f.out, "output path")->required();
}

int strategy_code(const std::string& name) {
  if (name == "osfa") return LUCID_STRATEGY_OSFA;
  if (name == "place-type" || name == "place_type") return LUCID_STRATEGY_PLACE_TYPE;
  if (name == "wdlr") return LUCID_STRATEGY_WDLR;
  if (name == "sda") return LUCID_STRATEGY_SDA;
  usage_error("unknown strategy '" + name + "' (expected osfa|place-type|wdlr|sda)");
}

int aggregation_code(const std::string& name) {
  if (name == "weighted_average") return LUCID_AGG_WEIGHTED_AVERAGE;
  if (name == "majority_vote") return LUCID_AGG_MAJORITY_VOTE;
  usage_error("unknown aggregation '" + name + "' (expected weighted_average|majority_vote)");
}

lucid_train_options train_options(const TrainFlags& f, const lucid_dataset* data) {
  lucid_train_options o;
  lucid_train_options_init(&o);
  o.strategy = strategy_code(f.strategy);
  if (f.frozen_opt->count() > 0 && o.strategy != LUCID_STRATEGY_SDA)
    usage_error("--frozen-layers only applies to --strategy sda");
  o.base_lr = f.lr;
  o.epochs = f.epochs;
  o.seed = f.seed;
  o.k_neighbors = f.k_neighbors;
  o.cutoff = f.cutoff;
  o.num_layers = f.layers;
  o.hidden_dim = f.hidden;
  o.alpha_threshold = f.alpha_threshold;
  o.frozen_layers = f.frozen_layers;
  o.lambda = f.lambda;
  o.finetune_epochs = f.finetune_epochs;
  o.source_batch = f.source_batch;
  o.select_on_validation = f.no_select ? 0 : 1;
  if (!f.place_type.empty()) check(lucid_dataset_place_type_index(data, f.place_type.c_str(), &o.target_place_type));
  return o;
}

Splits prepared_splits(const TrainFlags& f, const lucid_dataset* data) {
  Splits s = split_data(data, f.seed);
  if (f.augment) {
    lucid_dataset* aug = nullptr;
    check(lucid_dataset_augment(s.train.get(), f.augment_points, f.seed, &aug));
    s.train.reset(aug);
    log_line("augmented training split to " + std::to_string(lucid_dataset_num_samples(aug)) +
             " samples");
  }
  return s;
}

// ---- commands -----------------------------------------------------------

struct GenerateFlags {
  std::string benchmark = "fig1";
  std::size_t samples_per_cell = 40;
  std::uint64_t seed = 0;
  std::string out;
};

void run_generate(const GenerateFlags& f, RunRecord& rec) {
  lucid_dataset* d = nullptr;
  check(lucid_dataset_generate(f.benchmark.c_str(), f.samples_per_cell, f.seed, &d));
  DatasetPtr data(d);
  check(lucid_dataset_save(data.get(), f.out.c_str()));
  log_line("wrote " + std::to_string(lucid_dataset_num_samples(data.get())) + " samples to " + f.out);
  rec.seed = f.seed;
  if (f.benchmark != "fig1") rec.inputs.push_back(f.benchmark);
  rec.outputs.push_back(f.out);
}

void run_train(const TrainFlags& f, RunRecord& rec) {
  DatasetPtr data = load_data(f.data);
  const lucid_train_options opts = train_options(f, data.get());
  Splits s = prepared_splits(f, data.get());
  lucid_ensemble* e = nullptr;
  check(lucid_train(s.train.get(), s.val.get(), &opts, &e));
  EnsemblePtr ensemble(e);
  check(lucid_ensemble_set_metadata(ensemble.get(), "data", manifest_path(f.data).string().c_str()));
  check(lucid_ensemble_set_metadata(ensemble.get(), "split_seed", std::to_string(f.seed).c_str()));
  check(lucid_ensemble_save(ensemble.get(), f.out.c_str()));

  char* log_csv = nullptr;
  check(lucid_ensemble_training_log(ensemble.get(), data.get(), &log_csv));
  write_atomic(fs::path(f.out) / "training_log_readable.csv", take(log_csv));
  char* summary = nullptr;
  check(lucid_ensemble_summary(ensemble.get(), data.get(), &summary));
  const std::string summary_text = take(summary);
  write_atomic(fs::path(f.out) / "summary.json", summary_text);
  for (const auto& m : json::parse(summary_text).at("members")) {
    std::ostringstream rates;
    for (const auto& r : m.value("learning_rates", json::array())) rates << ' ' << r.get<double>();
    log_line("member " + m.at("member").get<std::string>() + ": " +
             std::to_string(m.value("num_samples", 0)) + " samples, learning rates" + rates.str() +
             ", selected epoch " + std::to_string(m.value("selected_epoch", 0)));
  }
  rec.seed = f.seed;
  rec.inputs.push_back(manifest_path(f.data).string());
  rec.outputs.push_back(f.out);
}

struct EvalFlags {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string aggregation;
  std::string out;
  std::int64_t split_seed = -1;
};

EnsemblePtr load_checkpoint(const std::string& dir) {
  lucid_ensemble* e = nullptr;
  check(lucid_ensemble_load(dir.c_str(), &e));
  return EnsemblePtr(e);
}

std::uint64_t checkpoint_seed(const lucid_ensemble* e) {
  lucid_train_options o;
  check(lucid_ensemble_options(e, &o));
  return o.seed;
}

DatasetPtr pick_split(DatasetPtr data, const std::string& which, std::uint64_t seed) {
  if (which == "all") return data;
  Splits s = split_data(data.get(), seed);
  if (which == "train") return std::move(s.train);
  if (which == "val") return std::move(s.val);
  if (which == "test") return std::move(s.test);
  usage_error("unknown split '" + which + "' (expected train|val|test|all)");
}

void run_eval(const EvalFlags& f, RunRecord& rec) {
  EnsemblePtr ensemble = load_checkpoint(f.checkpoint);
  const std::uint64_t seed =
      f.split_seed >= 0 ? static_cast<std::uint64_t>(f.split_seed) : checkpoint_seed(ensemble.get());
  DatasetPtr data = pick_split(load_data(f.data), f.split, seed);

  lucid_metrics m;
  char* report = nullptr;
  check(lucid_evaluate(ensemble.get(), data.get(), &m, &report));
  json out = json::parse(take(report));
  out["split"] = f.split;
  if (!f.aggregation.empty()) {
    lucid_metrics gm;
    char* groups = nullptr;
    check(lucid_evaluate_groups(ensemble.get(), data.get(), aggregation_code(f.aggregation), &gm,
                                &groups));
    out["aggregation"] = f.aggregation;
    out["group_report"] = json::parse(take(groups));
  }
  write_atomic(f.out, out.dump(2) + "\n");
  char buf[160];
  std::snprintf(buf, sizeof buf, "accuracy %.4f precision %.4f recall %.4f f1 %.4f", m.accuracy,
                m.precision, m.recall, m.f1);
  log_line(buf);
  rec.seed = seed;
  rec.inputs = {f.checkpoint, manifest_path(f.data).string()};
  rec.outputs.push_back(f.out);
}

void run_sweep(TrainFlags f, RunRecord& rec) {
  if (f.strategy.empty()) f.strategy = "sda";
  if (strategy_code(f.strategy) != LUCID_STRATEGY_SDA)
    usage_error("sweep-frozen needs --strategy sda");
  if (f.frozen_opt->count() > 0) usage_error("sweep-frozen sets the frozen layers itself");
  DatasetPtr data = load_data(f.data);
  const lucid_train_options opts = train_options(f, data.get());
  Splits s = prepared_splits(f, data.get());
  char* csv = nullptr;
  check(lucid_sweep_frozen(s.train.get(), s.val.get(), s.test.get(), &opts, &csv));
  const std::string table = take(csv);
  write_atomic(f.out, table);
  std::cerr << table;
  rec.seed = f.seed;
  rec.inputs.push_back(manifest_path(f.data).string());
  rec.outputs.push_back(f.out);
}

struct ExplainFlags {
  std::string checkpoint;
  std::string data;
  std::string place_type;
  bool global = false;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  std::size_t max_subset = 3;
  std::int64_t layer = -1;
  double probe_l2 = 0.1;
  std::int64_t split_seed = -1;
  std::string out;
};

void run_explain(const ExplainFlags& f, RunRecord& rec) {
  if (f.global == !f.place_type.empty()) usage_error("give exactly one of --place-type or --global");
  EnsemblePtr ensemble = load_checkpoint(f.checkpoint);
  DatasetPtr data = load_data(f.data);
  const std::uint64_t split_seed =
      f.split_seed >= 0 ? static_cast<std::uint64_t>(f.split_seed) : checkpoint_seed(ensemble.get());
  Splits s = split_data(data.get(), split_seed);

  lucid_explain_options o;
  lucid_explain_options_init(&o);
  if (!f.place_type.empty()) check(lucid_dataset_place_type_index(data.get(), f.place_type.c_str(), &o.place_type));
  o.repeats = f.repeats;
  o.seed = f.seed;
  o.max_subset = f.max_subset;
  o.layer_index = static_cast<int32_t>(f.layer);
  o.probe_l2 = f.probe_l2;
  char* csv = nullptr;
  double probe_acc = 0.0;
  check(lucid_explain(ensemble.get(), s.train.get(), s.test.get(), &o, &csv, &probe_acc));
  const std::string table = take(csv);
  write_atomic(f.out, table);
  log_line("probe accuracy on the test split: " + std::to_string(probe_acc));
  std::istringstream lines(table);
  std::string line;
  for (int i = 0; i < 6 && std::getline(lines, line); ++i) log_line(line);
  rec.seed = f.seed;
  rec.inputs = {f.checkpoint, manifest_path(f.data).string()};
  rec.outputs.push_back(f.out);
}

fs::path manifest_location(const std::string& command, const std::string& out) {
  // Directory outputs hold their manifest; file outputs get a sibling.
  if (command == "generate" || command == "train") return fs::path(out) / "run_manifest.json";
  fs::path p(out);
  return p.parent_path() / (p.filename().string() + ".run_manifest.json");
}

int run_cli(std::vector<std::string> args, int depth);

struct Cli {
  CLI::App app{"lucid: place-type aware spatial point-set classification"};
  GenerateFlags gen;
  TrainFlags train;
  EvalFlags eval;
  TrainFlags sweep;
  ExplainFlags explain;
  std::string replay_path;
  CLI::App *gen_cmd, *train_cmd, *eval_cmd, *sweep_cmd, *explain_cmd, *replay_cmd;

  Cli() {
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(lucid_version()));
    app.option_defaults()->always_capture_default();

    gen_cmd = app.add_subcommand("generate", "generate a synthetic benchmark dataset");
    gen_cmd->add_option("--benchmark", gen.benchmark, "fig1 or a JSON benchmark spec file");
    gen_cmd->add_option("--samples-per-cell", gen.samples_per_cell, "samples per (place-type, class)");
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();

    train_cmd = app.add_subcommand("train", "train an ensemble and write a checkpoint directory");
    add_train_flags(train_cmd, train, true);

    eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint directory")->required();
    eval_cmd->add_option("--data", eval.data, "dataset directory or manifest")->required();
    eval_cmd->add_option("--split", eval.split, "train | val | test | all");
    eval_cmd->add_option("--split-seed", eval.split_seed, "split seed (-1 = checkpoint seed)");
    eval_cmd->add_option("--aggregation", eval.aggregation,
                         "also report groups combined by weighted_average | majority_vote");
    eval_cmd->add_option("--out", eval.out, "report file (JSON)")->required();

    sweep_cmd = app.add_subcommand("sweep-frozen", "sda accuracy for every frozen-layer count");
    add_train_flags(sweep_cmd, sweep, false);

    explain_cmd = app.add_subcommand("explain", "rank spatial relationships by permutation importance");
    explain_cmd->add_option("--checkpoint", explain.checkpoint, "checkpoint directory")->required();
    explain_cmd->add_option("--data", explain.data, "dataset directory or manifest")->required();
    explain_cmd->add_option("--place-type", explain.place_type, "explain this place-type's member");
    explain_cmd->add_flag("--global", explain.global, "explain over every place-type");
    explain_cmd->add_option("--repeats", explain.repeats, "shuffles per feature block");
    explain_cmd->add_option("--seed", explain.seed, "shuffle seed");
    explain_cmd->add_option("--max-subset", explain.max_subset, "largest neighbour multiset");
    explain_cmd->add_option("--layer", explain.layer, "hidden layer to read (-1 = last)");
    explain_cmd->add_option("--probe-l2", explain.probe_l2, "probe L2 weight");
    explain_cmd->add_option("--split-seed", explain.split_seed, "split seed (-1 = checkpoint seed)");
    explain_cmd->add_option("--out", explain.out, "ranked table (CSV)")->required();

    replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a run manifest");
    replay_cmd->add_option("manifest", replay_path, "run_manifest.json")->required();
  }
};

int execute(Cli& cli, int depth) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App* sub = cli.app.get_subcommands().front();
  if (sub == cli.replay_cmd) {
    if (depth > 0) usage_error("a run manifest cannot replay another replay");
    std::ifstream in(cli.replay_path);
    if (!in) throw Failure{kExitData, "cannot read " + cli.replay_path};
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Failure{kExitData, "malformed run manifest: " + std::string(e.what())};
    }
    std::vector<std::string> args{j.at("command").get<std::string>()};
    for (const auto& a : j.at("args")) args.push_back(a.get<std::string>());
    if (j.contains("working_directory")) fs::current_path(j.at("working_directory").get<std::string>());
    log_line("replaying " + args.front());
    return run_cli(std::move(args), depth + 1);
  }

  RunRecord rec = record_of(*sub);
  std::string out;
  if (sub == cli.gen_cmd) {
    run_generate(cli.gen, rec);
    out = cli.gen.out;
  } else if (sub == cli.train_cmd) {
    run_train(cli.train, rec);
    out = cli.train.out;
  } else if (sub == cli.eval_cmd) {
    run_eval(cli.eval, rec);
    out = cli.eval.out;
  } else if (sub == cli.sweep_cmd) {
    run_sweep(cli.sweep, rec);
    out = cli.sweep.out;
  } else if (sub == cli.explain_cmd) {
    run_explain(cli.explain, rec);
    out = cli.explain.out;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_manifest(manifest_location(rec.command, out), rec, secs);
  return 0;
}

int run_cli(std::vector<std::string> args, int depth) {
  Cli cli;
  try {
    std::reverse(args.begin(), args.end());
    cli.app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = cli.app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  return execute(cli, depth);
}

}  // namespace

int main(int argc, char** argv) {
  lucid_set_log_callback(
      [](int level, const char* message, void*) {
        std::cerr << "lucid: " << (level > 0 ? "warning: " : "") << message << '\n';
      },
      nullptr);
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_cli(std::move(args), 0);
  } catch (const Failure& f) {
    std::cerr << "lucid: error: " << f.message << '\n';
    return f.code;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "lucid: error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "lucid: error: " << e.what() << '\n';
    return 4;
  }
}
