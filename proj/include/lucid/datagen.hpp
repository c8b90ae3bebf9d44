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

// Synthetic point-set benchmarks with planted co-location motifs, plus the
// partition / rotation / resampling augmentations used on training data.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lucid/core_data.hpp"

namespace lucid {

struct PlantSpec {
  PlaceTypeId place_type;
  ClassId class_label;
  std::vector<CategoryId> arrangement;  ///< one point per entry per motif
  double radius = 1.0;                  ///< motif points lie within this of the centre
  std::size_t num_motifs = 0;
  std::size_t background_points = 0;
  double box_width = 100.0;
  double box_height = 100.0;
};

/// Throws Error(validation) unless the arrangement has >= 2 entries and
/// 0 < radius < min(box) / 4.
void validate_plant_spec(const PlantSpec& spec, std::size_t num_categories);

/// Motif centres are uniform in the box inset by the radius; motif points are
/// uniform in the disc around the centre. Background points are uniform in
/// the box with uniform categories. Motif points come first, in motif order.
MultiCategoryPointSet generate_sample(const PlantSpec& spec, std::size_t num_categories,
                                      std::uint64_t seed, std::string sample_id = "sample");

struct BenchmarkConfig {
  std::string name;
  std::vector<std::string> category_names;
  std::vector<std::string> place_type_names;
  Matrix distance_entries;
  double threshold = 1.0;
  std::vector<PlantSpec> cells;  ///< one per (place-type, class)
};

/// Two place-types with conflicting planted arrangements over categories
/// A..F (D, E, F only appear as background):
///
///   PT1  class 0: <A,B>     class 1: <A,B,C>
///   PT2  class 0: <A,B,C>   class 1: <A,B>
///
/// Within a place-type the arrangement separates the classes; pooled over
/// both place-types it carries no information.
BenchmarkConfig fig1_benchmark();

/// JSON: {"name", "categories": [..], "place_types": [..],
/// "distance_matrix": [[..]], "threshold", "cells": [{"place_type",
/// "class_label", "arrangement": [names], "radius", "num_motifs",
/// "background_points", "box": [w, h]}]}
BenchmarkConfig parse_benchmark_config(const std::string& json_text);

/// samples_per_cell samples for every cell, ids "<place-type>-c<label>-<nnnn>".
Dataset generate_benchmark(const BenchmarkConfig& config, std::size_t samples_per_cell,
                           std::uint64_t seed);

struct Partition {
  MultiCategoryPointSet left;
  MultiCategoryPointSet right;
  bool left_usable = true;   ///< false when the side has fewer than 2 points
  bool right_usable = true;
};

/// Vertical cut at min_x + fraction * width of the bounding rectangle.
/// Points with x < cut go left. Each side is re-normalised to its own origin.
Partition partition_mbr(const MultiCategoryPointSet& set, double fraction);

/// Clockwise rotation about the bounding-rectangle centre, then re-normalised.
MultiCategoryPointSet rotate_sample(const MultiCategoryPointSet& set, double degrees_clockwise);

/// n points uniformly without replacement when the set is large enough,
/// with replacement otherwise.
MultiCategoryPointSet sample_points(const MultiCategoryPointSet& set, std::size_t n,
                                    std::uint64_t seed);

struct AugmentOptions {
  std::vector<double> partition_fractions{0.2, 0.8};
  double rotation_step_degrees = 16.0;
  std::size_t rotations = 3;
  std::optional<std::size_t> sample_size;  ///< e.g. 1024
  std::uint64_t seed = 0;
};

struct AugmentResult {
  Dataset data;
  std::vector<std::string> warnings;
};

/// Each sample expands to itself plus its usable partitions; every one of
/// those is also rotated by step, 2*step, ... and optionally resampled.
AugmentResult augment_training_set(const Dataset& data, const AugmentOptions& options);

}  // namespace lucid
