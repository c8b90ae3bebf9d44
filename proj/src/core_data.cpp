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

#include "lucid/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include "lucid/error.hpp"
#include "text_io.hpp"

namespace lucid {

namespace fs = std::filesystem;

PlaceTypeDistanceMatrix validate_distance_matrix(const Matrix& entries,
                                                 double threshold) {
  if (entries.rows() != entries.cols() || entries.rows() == 0)
    fail_validation("distance matrix must be square and non-empty");
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    fail_validation("distance threshold must be a positive finite number");
  const auto n = entries.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = entries(i, j);
      std::ostringstream where;
      where << "distance matrix entry (" << i << "," << j << ")";
      if (!std::isfinite(v)) fail_validation(where.str() + " is not finite");
      if (i == j && v != 1.0) fail_validation(where.str() + " must be 1 on the diagonal");
      if (v < 1.0) fail_validation(where.str() + " is below 1");
      if (v != entries(j, i)) fail_validation(where.str() + " breaks symmetry");
    }
  }
  PlaceTypeDistanceMatrix m;
  m.entries_ = entries;
  m.threshold_ = threshold;
  return m;
}

std::size_t Dataset::num_classes() const {
  std::uint32_t max_label = 0;
  for (const auto& s : samples) max_label = std::max(max_label, s.label.value);
  return std::max<std::size_t>(2, max_label + 1);
}

CategoryId Dataset::category_id(const std::string& name) const {
  auto it = std::find(category_names.begin(), category_names.end(), name);
  if (it == category_names.end()) fail_validation("unknown category '" + name + "'");
  return CategoryId(static_cast<std::uint32_t>(it - category_names.begin()));
}

PlaceTypeId Dataset::place_type_id(const std::string& name) const {
  auto it = std::find(place_type_names.begin(), place_type_names.end(), name);
  if (it == place_type_names.end()) fail_validation("unknown place-type '" + name + "'");
  return PlaceTypeId(static_cast<std::uint32_t>(it - place_type_names.begin()));
}

const std::string& Dataset::place_type_name(PlaceTypeId id) const {
  static const std::string shared = "all";
  if (id == kSharedPlaceType) return shared;
  return place_type_names.at(id.value);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out = empty_like();
  out.samples.reserve(indices.size());
  for (auto i : indices) out.samples.push_back(samples.at(i));
  return out;
}

Dataset Dataset::empty_like() const {
  Dataset out;
  out.category_names = category_names;
  out.place_type_names = place_type_names;
  out.distance_matrix = distance_matrix;
  return out;
}

void normalize_origin(MultiCategoryPointSet& set) {
  if (set.points.empty()) return;
  double min_x = set.points.front().x;
  double min_y = set.points.front().y;
  for (const auto& p : set.points) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
  }
  for (auto& p : set.points) {
    p.x -= min_x;
    p.y -= min_y;
  }
}

void validate_dataset(const Dataset& data) {
  if (data.category_names.empty()) fail_validation("dataset has no categories");
  if (data.place_type_names.empty()) fail_validation("dataset has no place-types");
  if (data.distance_matrix.size() != data.num_place_types())
    fail_validation("distance matrix size does not match the place-type count");
  std::set<std::string> ids;
  std::set<std::uint32_t> labels;
  for (const auto& s : data.samples) {
    const std::string tag = "sample '" + s.sample_id + "': ";
    if (!ids.insert(s.sample_id).second) fail_validation(tag + "duplicate sample id");
    if (s.place_type.value >= data.num_place_types())
      fail_validation(tag + "place-type index out of range");
    if (s.points.size() < 2) fail_validation(tag + "fewer than 2 points");
    for (const auto& p : s.points) {
      if (p.category.value >= data.num_categories())
        fail_validation(tag + "category index out of range");
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        fail_validation(tag + "non-finite coordinate");
    }
    labels.insert(s.label.value);
  }
  if (!labels.empty()) {
    for (std::uint32_t c = 0; c <= *labels.rbegin(); ++c) {
      if (!labels.count(c))
        fail_validation("class label " + std::to_string(c) + " has no samples");
    }
  }
}

namespace {

std::vector<std::string> parse_name_list(std::string_view value) {
  std::vector<std::string> names;
  for (auto part : text::split(value, ',')) {
    if (part.empty()) fail_validation("empty name in manifest list");
    names.emplace_back(part);
  }
  return names;
}

Matrix read_distance_file(const fs::path& path) {
  const std::string content = text::read_file(path);
  auto tokens = text::split_whitespace(content);
  if (tokens.empty()) fail_validation("distance matrix file is empty: " + path.string());
  auto n = text::parse_int(tokens[0]);
  if (!n || *n <= 0) fail_validation("distance matrix size must be a positive integer");
  if (tokens.size() != 1 + static_cast<std::size_t>(*n * *n))
    fail_validation("distance matrix file has the wrong number of entries");
  Matrix m(*n, *n);
  for (long long i = 0; i < *n; ++i) {
    for (long long j = 0; j < *n; ++j) {
      auto v = text::parse_double(tokens[1 + i * *n + j]);
      if (!v) fail_validation("bad distance matrix entry in " + path.string());
      m(i, j) = *v;
    }
  }
  return m;
}

MultiCategoryPointSet read_sample_file(const Dataset& data, const fs::path& path,
                                       const std::string& sample_id) {
  const std::string tag = "sample '" + sample_id + "': ";
  std::string content;
  try {
    content = text::read_file(path);
  } catch (const Error&) {
    fail_validation(tag + "missing file " + path.string());
  }
  MultiCategoryPointSet set;
  set.sample_id = sample_id;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      auto cols = text::split(line, ',');
      if (cols.size() != 3 || cols[0] != "category" || cols[1] != "x" || cols[2] != "y")
        fail_validation(tag + "expected header 'category,x,y'");
      continue;
    }
    auto cols = text::split(line, ',');
    if (cols.size() != 3)
      fail_validation(tag + "line " + std::to_string(line_no) + " needs 3 columns");
    SpatialPoint p;
    try {
      p.category = data.category_id(std::string(cols[0]));
    } catch (const Error& e) {
      fail_validation(tag + e.what());
    }
    auto x = text::parse_double(cols[1]);
    auto y = text::parse_double(cols[2]);
    if (!x || !y)
      fail_validation(tag + "unparsable coordinate on line " + std::to_string(line_no));
    if (!std::isfinite(*x) || !std::isfinite(*y))
      fail_validation(tag + "non-finite coordinate on line " + std::to_string(line_no));
    p.x = *x;
    p.y = *y;
    set.points.push_back(p);
  }
  if (set.points.size() < 2) fail_validation(tag + "fewer than 2 points");
  return set;
}

}  // namespace

Dataset load_dataset(const fs::path& manifest_path) {
  const std::string content = text::read_file(manifest_path);
  const fs::path base = manifest_path.parent_path();
  Dataset data;
  std::optional<fs::path> matrix_path;
  std::optional<double> threshold;
  struct Row {
    std::string id, place_type;
    long long label;
    fs::path file;
  };
  std::vector<Row> rows;

  for (auto line : text::split(content, '\n')) {
    if (line.empty() || line.front() == '#') continue;
    auto colon = line.find(':');
    auto comma = line.find(',');
    if (colon != std::string_view::npos && (comma == std::string_view::npos || colon < comma)) {
      auto key = text::trim(line.substr(0, colon));
      auto value = text::trim(line.substr(colon + 1));
      if (key == "categories") {
        data.category_names = parse_name_list(value);
      } else if (key == "place_types") {
        data.place_type_names = parse_name_list(value);
      } else if (key == "distance_matrix") {
        matrix_path = base / fs::path(std::string(value));
      } else if (key == "threshold") {
        threshold = text::parse_double(value);
        if (!threshold) fail_validation("manifest threshold is not a number");
      } else {
        fail_validation("unknown manifest key '" + std::string(key) + "'");
      }
      continue;
    }
    auto cols = text::split(line, ',');
    if (cols.size() != 4) fail_validation("manifest sample line needs 4 fields: " + std::string(line));
    auto label = text::parse_int(cols[2]);
    if (!label || *label < 0)
      fail_validation("sample '" + std::string(cols[0]) + "': bad class label");
    rows.push_back({std::string(cols[0]), std::string(cols[1]), *label,
                    base / fs::path(std::string(cols[3]))});
  }
  if (data.category_names.empty()) fail_validation("manifest lacks 'categories:'");
  if (data.place_type_names.empty()) fail_validation("manifest lacks 'place_types:'");
  if (!matrix_path) fail_validation("manifest lacks 'distance_matrix:'");
  if (!threshold) fail_validation("manifest lacks 'threshold:'");

  data.distance_matrix = validate_distance_matrix(read_distance_file(*matrix_path), *threshold);

  for (const auto& row : rows) {
    auto set = read_sample_file(data, row.file, row.id);
    try {
      set.place_type = data.place_type_id(row.place_type);
    } catch (const Error& e) {
      fail_validation("sample '" + row.id + "': " + e.what());
    }
    set.label = ClassId(static_cast<std::uint32_t>(row.label));
    normalize_origin(set);
    data.samples.push_back(std::move(set));
  }
  validate_dataset(data);
  return data;
}

void save_dataset(const Dataset& data, const fs::path& directory) {
  fs::create_directories(directory / "samples");
  auto join = [](const std::vector<std::string>& names) {
    std::string s;
    for (std::size_t i = 0; i < names.size(); ++i) s += (i ? "," : "") + names[i];
    return s;
  };

  std::ostringstream manifest;
  manifest << "categories: " << join(data.category_names) << '\n'
           << "place_types: " << join(data.place_type_names) << '\n'
           << "distance_matrix: distance_matrix.txt\n"
           << "threshold: " << text::format_double(data.distance_matrix.threshold()) << '\n';

  for (const auto& s : data.samples) {
    const std::string rel = "samples/" + s.sample_id + ".csv";
    manifest << s.sample_id << ',' << data.place_type_names.at(s.place_type.value) << ','
             << s.label.value << ',' << rel << '\n';
    std::string body = "category,x,y\n";
    for (const auto& p : s.points) {
      body += data.category_names.at(p.category.value);
      body += ',';
      body += text::format_double(p.x);
      body += ',';
      body += text::format_double(p.y);
      body += '\n';
    }
    text::write_file_atomic(directory / rel, body);
  }

  const auto& m = data.distance_matrix.entries();
  std::ostringstream dm;
  dm << m.rows() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      dm << (j ? " " : "") << text::format_double(m(i, j));
    dm << '\n';
  }
  text::write_file_atomic(directory / "distance_matrix.txt", dm.str());
  text::write_file_atomic(directory / "manifest.txt", manifest.str());
}

}  // namespace lucid
