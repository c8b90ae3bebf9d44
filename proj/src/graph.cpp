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

#include "lucid/graph.hpp"

#include <algorithm>
#include <cmath>

#include "lucid/error.hpp"

namespace lucid {

namespace {

struct Candidate {
  double dist2;
  std::uint32_t index;
  bool operator<(const Candidate& o) const {
    return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index);
  }
};

double squared_distance(const SpatialPoint& a, const SpatialPoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::vector<std::uint32_t> select_nearest(std::vector<Candidate>& candidates, std::size_t k,
                                          std::optional<double> cutoff) {
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end());
  std::vector<std::uint32_t> out;
  out.reserve(take);
  const double limit2 = cutoff ? *cutoff * *cutoff : 0.0;
  for (std::size_t i = 0; i < take; ++i) {
    if (cutoff && candidates[i].dist2 > limit2) break;
    out.push_back(candidates[i].index);
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> exhaustive(std::span<const SpatialPoint> pts,
                                                   std::size_t k,
                                                   std::optional<double> cutoff) {
  const auto n = pts.size();
  std::vector<std::vector<std::uint32_t>> adj(n);
  std::vector<Candidate> cand;
  cand.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    cand.clear();
    for (std::size_t u = 0; u < n; ++u) {
      if (u == s) continue;
      cand.push_back({squared_distance(pts[s], pts[u]), static_cast<std::uint32_t>(u)});
    }
    adj[s] = select_nearest(cand, k, cutoff);
  }
  return adj;
}

// Uniform grid; rings of cells around the query are scanned until the k-th
// candidate is strictly closer than anything an unscanned ring could hold.
std::vector<std::vector<std::uint32_t>> bucketed(std::span<const SpatialPoint> pts,
                                                 std::size_t k,
                                                 std::optional<double> cutoff) {
  const auto n = pts.size();
  double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double width = std::max(max_x - min_x, 1e-12);
  const double height = std::max(max_y - min_y, 1e-12);
  const double target_cells = static_cast<double>(n) / 4.0;
  double cell = std::sqrt(width * height / target_cells);
  if (!(cell > 0.0) || !std::isfinite(cell)) cell = std::max(width, height);
  const auto nx = static_cast<long>(std::floor(width / cell)) + 1;
  const auto ny = static_cast<long>(std::floor(height / cell)) + 1;

  auto cell_of = [&](const SpatialPoint& p) {
    long cx = std::clamp(static_cast<long>((p.x - min_x) / cell), 0L, nx - 1);
    long cy = std::clamp(static_cast<long>((p.y - min_y) / cell), 0L, ny - 1);
    return std::pair{cx, cy};
  };
  std::vector<std::vector<std::uint32_t>> buckets(static_cast<std::size_t>(nx * ny));
  for (std::size_t i = 0; i < n; ++i) {
    auto [cx, cy] = cell_of(pts[i]);
    buckets[static_cast<std::size_t>(cy * nx + cx)].push_back(static_cast<std::uint32_t>(i));
  }

  std::vector<std::vector<std::uint32_t>> adj(n);
  std::vector<Candidate> cand;
  const long max_ring = std::max(nx, ny);
  for (std::size_t s = 0; s < n; ++s) {
    cand.clear();
    auto [cx, cy] = cell_of(pts[s]);
    for (long ring = 0; ring <= max_ring; ++ring) {
      for (long y = cy - ring; y <= cy + ring; ++y) {
        if (y < 0 || y >= ny) continue;
        for (long x = cx - ring; x <= cx + ring; ++x) {
          if (x < 0 || x >= nx) continue;
          if (std::max(std::labs(x - cx), std::labs(y - cy)) != ring) continue;
          for (auto u : buckets[static_cast<std::size_t>(y * nx + x)]) {
            if (u == s) continue;
            cand.push_back({squared_distance(pts[s], pts[u]), u});
          }
        }
      }
      // Anything in ring+1 or beyond is at least ring*cell away.
      const double reach = static_cast<double>(ring) * cell;
      if (cutoff && reach > *cutoff) break;
      if (cand.size() >= k) {
        std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1),
                         cand.end());
        if (cand[k - 1].dist2 < reach * reach) break;
      }
    }
    adj[s] = select_nearest(cand, k, cutoff);
  }
  return adj;
}

}  // namespace

KnnGraph build_knn_graph(std::span<const SpatialPoint> points, std::size_t k,
                         std::optional<double> cutoff) {
  if (k == 0) fail_validation("knn graph: k must be at least 1");
  if (points.size() < 2) fail_validation("knn graph: need at least 2 points");
  if (cutoff && !(*cutoff > 0.0)) fail_validation("knn graph: cutoff must be positive");
  auto adj = points.size() <= kExhaustiveKnnLimit ? exhaustive(points, k, cutoff)
                                                  : bucketed(points, k, cutoff);
  return KnnGraph(k, cutoff, std::move(adj));
}

}  // namespace lucid
