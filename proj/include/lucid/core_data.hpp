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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lucid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Small non-negative index into one of the dataset vocabularies. The tag
/// keeps category, place-type and class indices from mixing.
template <class Tag>
struct StrongIndex {
  std::uint32_t value = 0;

  constexpr StrongIndex() = default;
  constexpr explicit StrongIndex(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(StrongIndex, StrongIndex) = default;
};

using CategoryId = StrongIndex<struct CategoryTag>;
using PlaceTypeId = StrongIndex<struct PlaceTypeTag>;
using ClassId = StrongIndex<struct ClassTag>;

/// Key under which a one-size-fits-all model stores its single W/B entry.
inline constexpr PlaceTypeId kSharedPlaceType{0xFFFFFFFFu};

struct SpatialPoint {
  CategoryId category;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const SpatialPoint&, const SpatialPoint&) = default;
};

struct MultiCategoryPointSet {
  std::string sample_id;
  PlaceTypeId place_type;
  ClassId label;
  std::vector<SpatialPoint> points;

  friend bool operator==(const MultiCategoryPointSet&,
                         const MultiCategoryPointSet&) = default;
};

/// Expert-supplied relative distances between place-types. Symmetric, unit
/// diagonal, every entry >= 1.
class PlaceTypeDistanceMatrix {
 public:
  PlaceTypeDistanceMatrix() = default;

  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  double threshold() const { return threshold_; }
  double operator()(PlaceTypeId a, PlaceTypeId b) const {
    return entries_(a.value, b.value);
  }
  const Matrix& entries() const { return entries_; }

  friend bool operator==(const PlaceTypeDistanceMatrix& a,
                         const PlaceTypeDistanceMatrix& b) {
    return a.threshold_ == b.threshold_ && a.entries_.rows() == b.entries_.rows() &&
           a.entries_ == b.entries_;
  }

 private:
  friend PlaceTypeDistanceMatrix validate_distance_matrix(const Matrix&, double);
  Matrix entries_;
  double threshold_ = 1.0;
};

/// Throws Error(validation) on a non-square matrix, asymmetry, a diagonal
/// entry other than 1, an entry below 1, or a non-positive threshold.
PlaceTypeDistanceMatrix validate_distance_matrix(const Matrix& entries,
                                                 double threshold);

struct Dataset {
  std::vector<std::string> category_names;
  std::vector<std::string> place_type_names;
  std::vector<MultiCategoryPointSet> samples;
  PlaceTypeDistanceMatrix distance_matrix;

  std::size_t num_categories() const { return category_names.size(); }
  std::size_t num_place_types() const { return place_type_names.size(); }
  /// max label + 1 over the samples, never less than 2.
  std::size_t num_classes() const;

  CategoryId category_id(const std::string& name) const;
  PlaceTypeId place_type_id(const std::string& name) const;
  const std::string& place_type_name(PlaceTypeId id) const;

  /// Same vocabularies and distance matrix, samples picked by index.
  Dataset subset(std::span<const std::size_t> indices) const;
  /// Same vocabularies and distance matrix, no samples.
  Dataset empty_like() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Shift the sample so its bounding rectangle starts at (0, 0). Idempotent.
void normalize_origin(MultiCategoryPointSet& set);

/// Checks every invariant on the dataset, naming the offending sample.
void validate_dataset(const Dataset& data);

Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes manifest.txt, distance_matrix.txt and samples/<id>.csv under
/// `directory`. Coordinates are written with shortest round-trip formatting.
void save_dataset(const Dataset& data, const std::filesystem::path& directory);

}  // namespace lucid
