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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "lucid/network.hpp"

namespace lucid {

/// One model file. Tensors are written row-major as hex floats so a
/// save/load cycle is bit-exact.
///
///   lucid-model 1
///   seed <u64>
///   meta <key> <value>          (zero or more)
///   layers <L>
///   place_types <count> <key>...  ("all" for the shared key)
///   tensor embedding <rows> <cols>
///   <row-major values>
///   layer <l> slope <hex>
///   tensor alpha <rows> <cols> ...
///   tensor W <key> <rows> <cols> ...
///   tensor B <key> <rows> <cols> ...
///   tensor classifier <rows> <cols> ...
///   tensor classifier_bias <rows> 1 ...
///   end
struct ModelCheckpoint {
  ModelParams params;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const ModelCheckpoint&, const ModelCheckpoint&) = default;
};

std::string serialize_model(const ModelCheckpoint& checkpoint);
ModelCheckpoint parse_model(const std::string& text);

void save_model(const ModelCheckpoint& checkpoint, const std::filesystem::path& path);
ModelCheckpoint load_model(const std::filesystem::path& path);

}  // namespace lucid
