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

#include "lucid/checkpoint.hpp"

#include <sstream>

#include "lucid/error.hpp"
#include "text_io.hpp"

namespace lucid {

namespace {

std::string key_token(PlaceTypeId p) {
  return p == kSharedPlaceType ? std::string("all") : std::to_string(p.value);
}

void write_tensor(std::ostringstream& out, const std::string& header, const Matrix& m) {
  out << "tensor " << header << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << text::format_hex(m(i, j));
    out << '\n';
  }
}

class TokenReader {
 public:
  explicit TokenReader(const std::string& text) : tokens_(text::split_whitespace(text)) {}

  std::string_view next() {
    if (pos_ >= tokens_.size()) fail_validation("model checkpoint ends early");
    return tokens_[pos_++];
  }
  std::string_view peek() const { return pos_ < tokens_.size() ? tokens_[pos_] : std::string_view{}; }
  void expect(std::string_view word) {
    auto got = next();
    if (got != word)
      fail_validation("model checkpoint: expected '" + std::string(word) + "', got '" +
                      std::string(got) + "'");
  }
  long long integer() {
    auto v = text::parse_int(next());
    if (!v || *v < 0) fail_validation("model checkpoint: bad integer");
    return *v;
  }
  double real() {
    auto v = text::parse_double_any(next());
    if (!v) fail_validation("model checkpoint: bad real");
    return *v;
  }
  PlaceTypeId key() {
    auto t = next();
    if (t == "all") return kSharedPlaceType;
    auto v = text::parse_int(t);
    if (!v || *v < 0) fail_validation("model checkpoint: bad place-type key");
    return PlaceTypeId(static_cast<std::uint32_t>(*v));
  }
  Matrix values(long long rows, long long cols) {
    Matrix m(rows, cols);
    for (long long i = 0; i < rows; ++i)
      for (long long j = 0; j < cols; ++j) m(i, j) = real();
    return m;
  }
  Matrix tensor(std::string_view name) {
    expect("tensor");
    expect(name);
    auto rows = integer();
    auto cols = integer();
    return values(rows, cols);
  }

 private:
  std::vector<std::string_view> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const ModelCheckpoint& ck) {
  const auto& p = ck.params;
  std::ostringstream out;
  out << "lucid-model 1\n";
  out << "seed " << ck.seed << '\n';
  for (const auto& [k, v] : ck.metadata) {
    if (k.find_first_of(" \t\n") != std::string::npos || v.empty() ||
        v.find_first_of(" \t\n") != std::string::npos)
      fail_validation("checkpoint metadata must be single tokens: " + k);
    out << "meta " << k << ' ' << v << '\n';
  }
  out << "layers " << p.layers.size() << '\n';
  const auto keys = p.place_types();
  out << "place_types " << keys.size();
  for (auto k : keys) out << ' ' << key_token(k);
  out << '\n';
  write_tensor(out, "embedding", p.embedding);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    out << "layer " << l << " slope " << text::format_hex(layer.leaky_slope) << '\n';
    write_tensor(out, "alpha", layer.alpha);
    for (const auto& [k, w] : layer.W) write_tensor(out, "W " + key_token(k), w);
    for (const auto& [k, b] : layer.B) write_tensor(out, "B " + key_token(k), b);
  }
  write_tensor(out, "classifier", p.classifier);
  write_tensor(out, "classifier_bias", p.classifier_bias);
  out << "end\n";
  return out.str();
}

ModelCheckpoint parse_model(const std::string& text) {
  TokenReader in(text);
  in.expect("lucid-model");
  if (in.integer() != 1) fail_validation("unsupported model checkpoint version");
  ModelCheckpoint ck;
  in.expect("seed");
  auto seed = text::parse_u64(in.next());
  if (!seed) fail_validation("model checkpoint: bad seed");
  ck.seed = *seed;
  while (in.peek() == "meta") {
    in.next();
    std::string k(in.next());
    ck.metadata[k] = std::string(in.next());
  }
  in.expect("layers");
  const auto num_layers = in.integer();
  in.expect("place_types");
  const auto num_keys = in.integer();
  std::vector<PlaceTypeId> keys;
  for (long long i = 0; i < num_keys; ++i) keys.push_back(in.key());

  auto& p = ck.params;
  p.embedding = in.tensor("embedding");
  for (long long l = 0; l < num_layers; ++l) {
    LayerParams layer;
    in.expect("layer");
    if (in.integer() != l) fail_validation("model checkpoint: layers out of order");
    in.expect("slope");
    layer.leaky_slope = in.real();
    layer.alpha = in.tensor("alpha");
    for (const char* which : {"W", "B"}) {
      for (long long i = 0; i < num_keys; ++i) {
        in.expect("tensor");
        in.expect(which);
        auto key = in.key();
        auto rows = in.integer();
        auto cols = in.integer();
        (which[0] == 'W' ? layer.W : layer.B)[key] = in.values(rows, cols);
      }
    }
    p.layers.push_back(std::move(layer));
  }
  p.classifier = in.tensor("classifier");
  Matrix bias = in.tensor("classifier_bias");
  if (bias.cols() != 1) fail_validation("model checkpoint: classifier bias must be a column");
  p.classifier_bias = bias.col(0);
  in.expect("end");
  if (p.place_types() != keys && num_layers > 0)
    fail_validation("model checkpoint: place-type list does not match the tensors");
  check_model(p);
  return ck;
}

void save_model(const ModelCheckpoint& checkpoint, const std::filesystem::path& path) {
  text::write_file_atomic(path, serialize_model(checkpoint));
}

ModelCheckpoint load_model(const std::filesystem::path& path) {
  return parse_model(text::read_file(path));
}

}  // namespace lucid
