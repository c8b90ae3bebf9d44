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

// Ensemble checkpoints: <dir>/index.json, one member_<key>.model per member,
// and training_log.csv.

#include <sstream>

#include <json.hpp>

#include "lucid/checkpoint.hpp"
#include "lucid/error.hpp"
#include "lucid/training.hpp"
#include "text_io.hpp"

namespace lucid {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string key_token(PlaceTypeId p) {
  return p == kSharedPlaceType ? std::string("all") : std::to_string(p.value);
}

PlaceTypeId parse_key(const std::string& t) {
  if (t == "all") return kSharedPlaceType;
  auto v = text::parse_int(t);
  if (!v || *v < 0) fail_validation("ensemble index: bad member key '" + t + "'");
  return PlaceTypeId(static_cast<std::uint32_t>(*v));
}

json config_to_json(const StrategyConfig& c) {
  json j;
  j["strategy"] = to_string(c.kind);
  j["base_lr"] = c.base_lr;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["k_neighbors"] = c.k_neighbors;
  j["cutoff"] = c.cutoff ? json(*c.cutoff) : json(nullptr);
  j["num_layers"] = c.num_layers;
  j["hidden_dim"] = c.hidden_dim;
  j["leaky_slope"] = c.leaky_slope;
  j["alpha_threshold"] = c.alpha_threshold ? json(*c.alpha_threshold) : json(nullptr);
  j["sda_frozen_layers"] = c.sda_frozen_layers;
  j["sda_lambda"] = c.sda_lambda;
  j["sda_finetune_epochs"] = c.sda_finetune_epochs ? json(*c.sda_finetune_epochs) : json(nullptr);
  j["sda_source_batch"] = c.sda_source_batch;
  j["sda_freeze_classifier"] = c.sda_freeze_classifier;
  j["target_place_type"] =
      c.target_place_type ? json(c.target_place_type->value) : json(nullptr);
  j["aggregation"] = to_string(c.aggregation);
  j["select_on_validation"] = c.select_on_validation;
  return j;
}

StrategyConfig config_from_json(const json& j) {
  StrategyConfig c;
  c.kind = parse_strategy(j.at("strategy").get<std::string>());
  c.base_lr = j.at("base_lr").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.k_neighbors = j.at("k_neighbors").get<std::size_t>();
  if (!j.at("cutoff").is_null()) c.cutoff = j.at("cutoff").get<double>();
  c.num_layers = j.at("num_layers").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  if (!j.at("alpha_threshold").is_null()) c.alpha_threshold = j.at("alpha_threshold").get<double>();
  c.sda_frozen_layers = j.at("sda_frozen_layers").get<std::size_t>();
  c.sda_lambda = j.at("sda_lambda").get<double>();
  if (!j.at("sda_finetune_epochs").is_null())
    c.sda_finetune_epochs = j.at("sda_finetune_epochs").get<std::size_t>();
  c.sda_source_batch = j.at("sda_source_batch").get<std::size_t>();
  c.sda_freeze_classifier = j.at("sda_freeze_classifier").get<bool>();
  if (!j.at("target_place_type").is_null())
    c.target_place_type = PlaceTypeId(j.at("target_place_type").get<std::uint32_t>());
  c.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
  c.select_on_validation = j.at("select_on_validation").get<bool>();
  return c;
}

}  // namespace

void save_ensemble(const TrainedEnsemble& ensemble, const fs::path& directory) {
  fs::create_directories(directory);
  json index;
  index["format"] = "lucid-ensemble";
  index["version"] = 1;
  index["config"] = config_to_json(ensemble.config);
  index["metadata"] = ensemble.metadata;
  json members = json::array();
  for (const auto& [key, params] : ensemble.members) {
    const std::string file = "member_" + key_token(key) + ".model";
    ModelCheckpoint ck;
    ck.params = params;
    ck.seed = ensemble.config.seed;
    ck.metadata["strategy"] = to_string(ensemble.config.kind);
    ck.metadata["member"] = key_token(key);
    save_model(ck, directory / file);

    json m;
    m["key"] = key_token(key);
    m["file"] = file;
    if (auto it = ensemble.summaries.find(key); it != ensemble.summaries.end()) {
      m["num_samples"] = it->second.num_samples;
      m["learning_rates"] = it->second.learning_rates;
      m["selected_epoch"] = it->second.selected_epoch;
    }
    members.push_back(std::move(m));
  }
  index["members"] = std::move(members);

  std::ostringstream log;
  log << "epoch,member,phase,mean_loss,val_accuracy\n";
  for (const auto& r : ensemble.training_log) {
    log << r.epoch << ',' << key_token(r.member) << ',' << r.phase << ','
        << text::format_hex(r.mean_loss) << ','
        << (r.val_accuracy ? text::format_hex(*r.val_accuracy) : std::string()) << '\n';
  }
  text::write_file_atomic(directory / "training_log.csv", log.str());
  text::write_file_atomic(directory / "index.json", index.dump(2) + "\n");
}

TrainedEnsemble load_ensemble(const fs::path& directory) {
  const fs::path index_path = directory / "index.json";
  if (!fs::exists(index_path)) fail_validation("no ensemble checkpoint at " + directory.string());
  TrainedEnsemble e;
  try {
    const json index = json::parse(text::read_file(index_path));
    if (index.at("format") != "lucid-ensemble" || index.at("version") != 1)
      fail_validation("unsupported ensemble checkpoint format");
    e.config = config_from_json(index.at("config"));
    if (index.contains("metadata"))
      e.metadata = index.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& m : index.at("members")) {
      const PlaceTypeId key = parse_key(m.at("key").get<std::string>());
      auto ck = load_model(directory / m.at("file").get<std::string>());
      e.members.emplace(key, std::move(ck.params));
      MemberSummary s;
      if (m.contains("num_samples")) {
        s.num_samples = m.at("num_samples").get<std::size_t>();
        s.learning_rates = m.at("learning_rates").get<std::vector<double>>();
        s.selected_epoch = m.at("selected_epoch").get<std::size_t>();
        e.summaries.emplace(key, std::move(s));
      }
    }
  } catch (const json::exception& ex) {
    fail_validation("malformed ensemble index " + index_path.string() + ": " + ex.what());
  }

  if (fs::exists(directory / "training_log.csv")) {
    const std::string content = text::read_file(directory / "training_log.csv");
    bool header = true;
    for (auto line : text::split(content, '\n')) {
      if (line.empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      auto cols = text::split(line, ',');
      if (cols.size() != 5) fail_validation("malformed training log line");
      EpochRecord r;
      auto epoch = text::parse_int(cols[0]);
      auto loss = text::parse_double_any(cols[3]);
      if (!epoch || !loss) fail_validation("malformed training log line");
      r.epoch = static_cast<std::size_t>(*epoch);
      r.member = parse_key(std::string(cols[1]));
      r.phase = std::string(cols[2]);
      r.mean_loss = *loss;
      if (!cols[4].empty()) r.val_accuracy = text::parse_double_any(cols[4]);
      e.training_log.push_back(std::move(r));
    }
  }
  return e;
}

std::string format_training_log(const TrainedEnsemble& ensemble, const Dataset& data) {
  std::ostringstream out;
  out << "epoch,member,phase,mean_loss,val_accuracy\n";
  for (const auto& r : ensemble.training_log) {
    out << r.epoch << ',' << data.place_type_name(r.member) << ',' << r.phase << ','
        << text::format_double(r.mean_loss) << ','
        << (r.val_accuracy ? text::format_double(*r.val_accuracy) : std::string()) << '\n';
  }
  return out.str();
}

}  // namespace lucid
