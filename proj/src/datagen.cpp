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

#include "lucid/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <json.hpp>

#include "lucid/error.hpp"
#include "text_io.hpp"

namespace lucid {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix(mix(mix(seed) ^ a) ^ b);
}

struct Bounds {
  double min_x, min_y, max_x, max_y;
};

Bounds bounds_of(const std::vector<SpatialPoint>& pts) {
  Bounds b{pts.front().x, pts.front().y, pts.front().x, pts.front().y};
  for (const auto& p : pts) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

std::string format_fraction(double f) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(std::lround(f * 100.0)));
  return buf;
}

}  // namespace

void validate_plant_spec(const PlantSpec& spec, std::size_t num_categories) {
  if (spec.arrangement.size() < 2)
    fail_validation("plant spec: arrangement needs at least 2 categories");
  for (auto c : spec.arrangement)
    if (c.value >= num_categories) fail_validation("plant spec: category out of range");
  if (!(spec.box_width > 0.0) || !(spec.box_height > 0.0) || !std::isfinite(spec.box_width) ||
      !std::isfinite(spec.box_height))
    fail_validation("plant spec: box must be positive and finite");
  if (!(spec.radius > 0.0) || !(spec.radius < std::min(spec.box_width, spec.box_height) / 4.0))
    fail_validation("plant spec: radius must lie in (0, min(box) / 4)");
  if (spec.num_motifs * spec.arrangement.size() + spec.background_points < 2)
    fail_validation("plant spec: sample would have fewer than 2 points");
}

MultiCategoryPointSet generate_sample(const PlantSpec& spec, std::size_t num_categories,
                                      std::uint64_t seed, std::string sample_id) {
  validate_plant_spec(spec, num_categories);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  MultiCategoryPointSet set;
  set.sample_id = std::move(sample_id);
  set.place_type = spec.place_type;
  set.label = spec.class_label;
  set.points.reserve(spec.num_motifs * spec.arrangement.size() + spec.background_points);

  const double r = spec.radius;
  for (std::size_t m = 0; m < spec.num_motifs; ++m) {
    const double cx = r + unit(rng) * (spec.box_width - 2.0 * r);
    const double cy = r + unit(rng) * (spec.box_height - 2.0 * r);
    for (auto c : spec.arrangement) {
      const double rho = r * std::sqrt(unit(rng));
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      set.points.push_back({c, cx + rho * std::cos(phi), cy + rho * std::sin(phi)});
    }
  }
  std::uniform_int_distribution<std::uint32_t> cat(0, static_cast<std::uint32_t>(num_categories - 1));
  for (std::size_t i = 0; i < spec.background_points; ++i) {
    const double x = unit(rng) * spec.box_width;
    const double y = unit(rng) * spec.box_height;
    set.points.push_back({CategoryId(cat(rng)), x, y});
  }
  normalize_origin(set);
  return set;
}

BenchmarkConfig fig1_benchmark() {
  BenchmarkConfig c;
  c.name = "fig1";
  c.category_names = {"A", "B", "C", "D", "E", "F"};
  c.place_type_names = {"PT1", "PT2"};
  c.distance_entries = Matrix{{1.0, 2.0}, {2.0, 1.0}};
  c.threshold = 1.0;
  const CategoryId A(0), B(1), C(2);
  auto cell = [&](std::uint32_t pt, std::uint32_t label, std::vector<CategoryId> arr) {
    PlantSpec s;
    s.place_type = PlaceTypeId(pt);
    s.class_label = ClassId(label);
    s.arrangement = std::move(arr);
    s.radius = 2.0;
    s.num_motifs = 6;
    s.background_points = 40;
    s.box_width = 100.0;
    s.box_height = 100.0;
    return s;
  };
  c.cells = {cell(0, 0, {A, B}), cell(0, 1, {A, B, C}), cell(1, 0, {A, B, C}),
             cell(1, 1, {A, B})};
  return c;
}

BenchmarkConfig parse_benchmark_config(const std::string& json_text) {
  using json = nlohmann::json;
  BenchmarkConfig c;
  try {
    const json j = json::parse(json_text);
    c.name = j.value("name", std::string("custom"));
    c.category_names = j.at("categories").get<std::vector<std::string>>();
    c.place_type_names = j.at("place_types").get<std::vector<std::string>>();
    const auto rows = j.at("distance_matrix").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(rows.size());
    c.distance_entries = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != n)
        fail_validation("benchmark spec: distance_matrix must be square");
      for (Eigen::Index k = 0; k < n; ++k) c.distance_entries(i, k) = rows[i][k];
    }
    c.threshold = j.value("threshold", 1.0);

    auto index_of = [](const std::vector<std::string>& names, const std::string& name,
                       const char* what) {
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end())
        fail_validation(std::string("benchmark spec: unknown ") + what + " '" + name + "'");
      return static_cast<std::uint32_t>(it - names.begin());
    };
    for (const auto& jc : j.at("cells")) {
      PlantSpec s;
      s.place_type = PlaceTypeId(
          index_of(c.place_type_names, jc.at("place_type").get<std::string>(), "place-type"));
      s.class_label = ClassId(jc.at("class_label").get<std::uint32_t>());
      for (const auto& name : jc.at("arrangement").get<std::vector<std::string>>())
        s.arrangement.push_back(CategoryId(index_of(c.category_names, name, "category")));
      s.radius = jc.at("radius").get<double>();
      s.num_motifs = jc.at("num_motifs").get<std::size_t>();
      s.background_points = jc.value("background_points", std::size_t{0});
      if (jc.contains("box")) {
        const auto box = jc.at("box").get<std::vector<double>>();
        if (box.size() != 2) fail_validation("benchmark spec: box must be [width, height]");
        s.box_width = box[0];
        s.box_height = box[1];
      }
      c.cells.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& ex) {
    fail_validation(std::string("benchmark spec: ") + ex.what());
  }
  if (c.cells.empty()) fail_validation("benchmark spec: no cells");
  return c;
}

Dataset generate_benchmark(const BenchmarkConfig& config, std::size_t samples_per_cell,
                           std::uint64_t seed) {
  if (samples_per_cell == 0) fail_usage("samples per cell must be positive");
  Dataset data;
  data.category_names = config.category_names;
  data.place_type_names = config.place_type_names;
  data.distance_matrix = validate_distance_matrix(config.distance_entries, config.threshold);
  if (data.distance_matrix.size() != data.place_type_names.size())
    fail_validation("benchmark: distance matrix size does not match the place-types");

  for (std::size_t ci = 0; ci < config.cells.size(); ++ci) {
    const PlantSpec& spec = config.cells[ci];
    if (spec.place_type.value >= data.place_type_names.size())
      fail_validation("benchmark: cell place-type out of range");
    for (std::size_t i = 0; i < samples_per_cell; ++i) {
      char suffix[32];
      std::snprintf(suffix, sizeof suffix, "-c%u-%04zu", spec.class_label.value, i);
      std::string id = data.place_type_names[spec.place_type.value] + suffix;
      data.samples.push_back(generate_sample(spec, data.num_categories(),
                                             derive_seed(seed, ci, i), std::move(id)));
    }
  }
  validate_dataset(data);
  return data;
}

Partition partition_mbr(const MultiCategoryPointSet& set, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) fail_usage("partition fraction must lie in (0, 1)");
  if (set.points.empty()) fail_validation("partition: empty sample '" + set.sample_id + "'");
  const Bounds b = bounds_of(set.points);
  const double cut = b.min_x + fraction * (b.max_x - b.min_x);

  Partition out;
  const std::string tag = format_fraction(fraction);
  out.left = {set.sample_id + "_p" + tag + "L", set.place_type, set.label, {}};
  out.right = {set.sample_id + "_p" + tag + "R", set.place_type, set.label, {}};
  for (const auto& p : set.points) (p.x < cut ? out.left : out.right).points.push_back(p);
  out.left_usable = out.left.points.size() >= 2;
  out.right_usable = out.right.points.size() >= 2;
  if (!out.left.points.empty()) normalize_origin(out.left);
  if (!out.right.points.empty()) normalize_origin(out.right);
  return out;
}

MultiCategoryPointSet rotate_sample(const MultiCategoryPointSet& set, double degrees_clockwise) {
  if (!std::isfinite(degrees_clockwise)) fail_usage("rotation angle must be finite");
  MultiCategoryPointSet out = set;
  if (out.points.empty()) return out;
  const Bounds b = bounds_of(set.points);
  const double cx = 0.5 * (b.min_x + b.max_x);
  const double cy = 0.5 * (b.min_y + b.max_y);
  const double theta = degrees_clockwise * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  for (auto& p : out.points) {
    const double dx = p.x - cx, dy = p.y - cy;
    p.x = cx + dx * c + dy * s;
    p.y = cy - dx * s + dy * c;
  }
  normalize_origin(out);
  return out;
}

MultiCategoryPointSet sample_points(const MultiCategoryPointSet& set, std::size_t n,
                                    std::uint64_t seed) {
  if (n < 2) fail_usage("sample size must be at least 2");
  if (set.points.empty()) fail_validation("sampling: empty sample '" + set.sample_id + "'");
  std::mt19937_64 rng(seed);
  MultiCategoryPointSet out{set.sample_id, set.place_type, set.label, {}};
  out.points.reserve(n);
  const std::size_t m = set.points.size();
  if (m >= n) {
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(idx[i], idx[pick(rng)]);
      out.points.push_back(set.points[idx[i]]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    for (std::size_t i = 0; i < n; ++i) out.points.push_back(set.points[pick(rng)]);
  }
  normalize_origin(out);
  return out;
}

AugmentResult augment_training_set(const Dataset& data, const AugmentOptions& options) {
  AugmentResult result;
  result.data = data.empty_like();
  std::uint64_t counter = 0;
  for (const auto& sample : data.samples) {
    std::vector<MultiCategoryPointSet> bases{sample};
    for (double f : options.partition_fractions) {
      Partition part = partition_mbr(sample, f);
      if (part.left_usable) bases.push_back(std::move(part.left));
      else result.warnings.push_back("partition " + part.left.sample_id + " has fewer than 2 points; dropped");
      if (part.right_usable) bases.push_back(std::move(part.right));
      else result.warnings.push_back("partition " + part.right.sample_id + " has fewer than 2 points; dropped");
    }
    for (const auto& base : bases) {
      std::vector<MultiCategoryPointSet> variants{base};
      for (std::size_t r = 1; r <= options.rotations; ++r) {
        const double deg = options.rotation_step_degrees * static_cast<double>(r);
        auto rotated = rotate_sample(base, deg);
        rotated.sample_id += "_r" + std::to_string(std::lround(deg));
        variants.push_back(std::move(rotated));
      }
      for (auto& v : variants) {
        if (options.sample_size)
          v = sample_points(v, *options.sample_size, derive_seed(options.seed, ++counter));
        result.data.samples.push_back(std::move(v));
      }
    }
  }
  validate_dataset(result.data);
  return result;
}

}  // namespace lucid
