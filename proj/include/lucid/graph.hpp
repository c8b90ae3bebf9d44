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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lucid/core_data.hpp"

namespace lucid {

/// Directed k-nearest-neighbour lists over a point set's locations.
///
/// neighbors(s) is sorted by (distance, index) and never contains s. Its
/// length is min(k, number of other nodes within the cutoff).
class KnnGraph {
 public:
  KnnGraph() = default;
  KnnGraph(std::size_t k, std::optional<double> cutoff,
           std::vector<std::vector<std::uint32_t>> neighbors)
      : k_(k), cutoff_(cutoff), neighbors_(std::move(neighbors)) {}

  std::size_t num_nodes() const { return neighbors_.size(); }
  std::size_t k() const { return k_; }
  std::optional<double> cutoff() const { return cutoff_; }
  std::span<const std::uint32_t> neighbors(std::size_t s) const { return neighbors_[s]; }
  const std::vector<std::vector<std::uint32_t>>& adjacency() const { return neighbors_; }

  friend bool operator==(const KnnGraph&, const KnnGraph&) = default;

 private:
  std::size_t k_ = 0;
  std::optional<double> cutoff_;
  std::vector<std::vector<std::uint32_t>> neighbors_;
};

/// Point counts above this use grid buckets instead of the all-pairs scan.
inline constexpr std::size_t kExhaustiveKnnLimit = 2048;

/// Throws Error(validation) when k == 0, fewer than 2 points are given, or
/// the cutoff is not positive.
KnnGraph build_knn_graph(std::span<const SpatialPoint> points, std::size_t k,
                         std::optional<double> cutoff = std::nullopt);

}  // namespace lucid
