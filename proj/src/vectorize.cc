// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/vectorize.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "assaysem/error.h"

namespace assaysem {

namespace {

// Bytes >= 0x80 belong to UTF-8 sequences and are kept inside tokens.
bool IsTokenChar(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

void EmitToken(std::string& token, TokenStream& out) {
  if (token.size() >= 2 &&
      !std::all_of(token.begin(), token.end(),
                   [](unsigned char c) { return std::isdigit(c); })) {
    out.push_back(token);
  }
  token.clear();
}

class Fnv1a {
 public:
  void Update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }
  void Update(double v) {
    char buf[32];
    int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
    Update(std::string_view(buf, static_cast<size_t>(n)));
  }
  std::string Hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  uint64_t hash_ = 0xcbf29ce484222325ULL;
};

IdentifiedVector ParseVectorRow(const nlohmann::json& j, size_t line_no) {
  auto fail = [line_no](const std::string& what) {
    return Error(ErrorCode::kFormat,
                 "vector row " + std::to_string(line_no) + ": " + what);
  };
  if (!j.is_object()) throw fail("not an object");
  auto id = j.find("id");
  if (id == j.end() || !id->is_string() || id->get<std::string>().empty()) {
    throw fail("missing id");
  }
  IdentifiedVector row{id->get<std::string>(), {}};
  auto check = [&](const nlohmann::json& v) {
    if (!v.is_number()) throw fail("non-numeric value");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw fail("non-finite value");
    return d;
  };
  if (auto vec = j.find("vector"); vec != j.end()) {
    if (!vec->is_array() || vec->empty()) throw fail("vector must be a non-empty array");
    std::vector<double> values;
    values.reserve(vec->size());
    for (const auto& v : *vec) values.push_back(check(v));
    row.vector = AssayVector::FromDense(values);
    return row;
  }
  auto dim = j.find("dim");
  auto indices = j.find("indices");
  auto values = j.find("values");
  if (dim == j.end() || indices == j.end() || values == j.end() ||
      !dim->is_number_unsigned() || !indices->is_array() || !values->is_array() ||
      indices->size() != values->size()) {
    throw fail("expected either vector or dim/indices/values");
  }
  std::vector<std::pair<uint32_t, double>> entries;
  entries.reserve(indices->size());
  for (size_t i = 0; i < indices->size(); ++i) {
    if (!(*indices)[i].is_number_unsigned()) throw fail("bad index");
    entries.emplace_back((*indices)[i].get<uint32_t>(), check((*values)[i]));
  }
  try {
    row.vector = AssayVector::FromSparse(dim->get<size_t>(), std::move(entries));
  } catch (const Error& e) {
    throw fail(e.what());
  }
  return row;
}

}  // namespace

TokenStream Tokenize(std::string_view text) {
  TokenStream out;
  std::string token;
  for (unsigned char c : text) {
    if (IsTokenChar(c)) {
      token.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!token.empty()) {
      EmitToken(token, out);
    }
  }
  if (!token.empty()) EmitToken(token, out);
  return out;
}

AssayVector AssayVector::FromSparse(size_t dimension,
                                    std::vector<std::pair<uint32_t, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  AssayVector v;
  v.dimension_ = dimension;
  for (const auto& [index, value] : entries) {
    if (index >= dimension) {
      throw Error(ErrorCode::kInvalidArgument, "sparse index out of range");
    }
    if (!v.indices_.empty() && v.indices_.back() == index) {
      v.values_.back() += value;
    } else {
      v.indices_.push_back(index);
      v.values_.push_back(value);
    }
  }
  size_t w = 0;
  for (size_t r = 0; r < v.indices_.size(); ++r) {
    if (v.values_[r] == 0.0) continue;
    v.indices_[w] = v.indices_[r];
    v.values_[w] = v.values_[r];
    ++w;
  }
  v.indices_.resize(w);
  v.values_.resize(w);
  v.RecomputeNorm();
  return v;
}

AssayVector AssayVector::FromDense(std::span<const double> values) {
  AssayVector v;
  v.dimension_ = values.size();
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) continue;
    v.indices_.push_back(static_cast<uint32_t>(i));
    v.values_.push_back(values[i]);
  }
  v.RecomputeNorm();
  return v;
}

void AssayVector::RecomputeNorm() {
  double sum = 0.0;
  for (double x : values_) sum += x * x;
  norm_ = std::sqrt(sum);
}

double AssayVector::Dot(std::span<const double> dense) const {
  double sum = 0.0;
  for (size_t i = 0; i < indices_.size(); ++i) sum += values_[i] * dense[indices_[i]];
  return sum;
}

double AssayVector::Dot(const AssayVector& other) const {
  double sum = 0.0;
  size_t i = 0, j = 0;
  while (i < indices_.size() && j < other.indices_.size()) {
    if (indices_[i] < other.indices_[j]) {
      ++i;
    } else if (indices_[i] > other.indices_[j]) {
      ++j;
    } else {
      sum += values_[i++] * other.values_[j++];
    }
  }
  return sum;
}

std::vector<double> AssayVector::ToDense() const {
  std::vector<double> dense(dimension_, 0.0);
  for (size_t i = 0; i < indices_.size(); ++i) dense[indices_[i]] = values_[i];
  return dense;
}

std::string_view VectorizerKindName(VectorizerKind kind) {
  return kind == VectorizerKind::kTfidf ? "tfidf" : "external";
}

void VectorizerModel::IndexVocabulary() {
  vocabulary_.clear();
  vocabulary_.reserve(terms_.size());
  for (size_t i = 0; i < terms_.size(); ++i) {
    vocabulary_.emplace(terms_[i], static_cast<uint32_t>(i));
  }
}

VectorizerModel VectorizerModel::FitTfidf(std::span<const std::string> train_texts) {
  std::map<std::string, size_t> df;
  size_t with_tokens = 0;
  for (const auto& text : train_texts) {
    TokenStream tokens = Tokenize(text);
    if (!tokens.empty()) ++with_tokens;
    std::set<std::string> distinct(tokens.begin(), tokens.end());
    for (const auto& t : distinct) ++df[t];
  }
  if (with_tokens == 0) {
    throw Error(ErrorCode::kFit, "cannot fit TF-IDF: no document contains a token");
  }
  VectorizerModel model;
  model.kind_ = VectorizerKind::kTfidf;
  const double n = static_cast<double>(train_texts.size());
  model.terms_.reserve(df.size());
  model.idf_.reserve(df.size());
  for (const auto& [term, count] : df) {
    model.terms_.push_back(term);
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  model.dimension_ = model.terms_.size();
  model.IndexVocabulary();
  model.metadata_ = {{"tokenizer", "lower/alnum-split/min2/no-numbers"},
                     {"tfidf", "raw-tf*smooth-idf/l2"},
                     {"documents", train_texts.size()}};
  return model;
}

VectorizerModel VectorizerModel::ParseEmbeddings(std::istream& in) {
  VectorizerModel model;
  model.kind_ = VectorizerKind::kExternal;
  std::string line;
  size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kFormat, "embedding row " + std::to_string(line_no) +
                                          ": invalid JSON");
    }
    if (first && j.is_object() && j.contains("meta")) {
      model.metadata_ = j["meta"];
      first = false;
      continue;
    }
    first = false;
    IdentifiedVector row = ParseVectorRow(j, line_no);
    if (model.dimension_ == 0) {
      model.dimension_ = row.vector.dimension();
    } else if (row.vector.dimension() != model.dimension_) {
      throw Error(ErrorCode::kFormat,
                  "embedding row " + std::to_string(line_no) + ": dimension " +
                      std::to_string(row.vector.dimension()) + " != " +
                      std::to_string(model.dimension_));
    }
    if (!model.embeddings_.emplace(row.id, std::move(row.vector)).second) {
      throw Error(ErrorCode::kFormat, "duplicate embedding id: " + row.id);
    }
  }
  if (model.embeddings_.empty()) {
    throw Error(ErrorCode::kFormat, "embedding file has no vectors");
  }
  return model;
}

VectorizerModel VectorizerModel::LoadEmbeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read embeddings: " + path.string());
  return ParseEmbeddings(in);
}

int64_t VectorizerModel::TermIndex(std::string_view term) const {
  auto it = vocabulary_.find(std::string(term));
  return it == vocabulary_.end() ? -1 : static_cast<int64_t>(it->second);
}

AssayVector VectorizerModel::TransformText(std::string_view text) const {
  if (kind_ != VectorizerKind::kTfidf) {
    throw Error(ErrorCode::kUnsupported,
                "external embedding model cannot vectorize raw text");
  }
  std::map<uint32_t, double> counts;
  for (const auto& token : Tokenize(text)) {
    auto it = vocabulary_.find(token);
    if (it != vocabulary_.end()) counts[it->second] += 1.0;
  }
  std::vector<std::pair<uint32_t, double>> entries;
  entries.reserve(counts.size());
  double sum = 0.0;
  for (const auto& [index, count] : counts) {
    double w = count * idf_[index];
    entries.emplace_back(index, w);
    sum += w * w;
  }
  if (sum > 0.0) {
    double inv = 1.0 / std::sqrt(sum);
    for (auto& e : entries) e.second *= inv;
  }
  return AssayVector::FromSparse(dimension_, std::move(entries));
}

bool VectorizerModel::HasEmbedding(std::string_view id) const {
  return embeddings_.find(id) != embeddings_.end();
}

const AssayVector& VectorizerModel::Lookup(std::string_view id) const {
  if (kind_ != VectorizerKind::kExternal) {
    throw Error(ErrorCode::kUnsupported, "lookup requires an external embedding model");
  }
  auto it = embeddings_.find(id);
  if (it == embeddings_.end()) {
    throw Error(ErrorCode::kMissingEmbedding,
                "no embedding for assay " + std::string(id));
  }
  return it->second;
}

AssayVector VectorizerModel::Transform(const BioassayRecord& record) const {
  if (kind_ == VectorizerKind::kExternal) return Lookup(record.id);
  return TransformText(record.text);
}

std::string VectorizerModel::Fingerprint() const {
  Fnv1a h;
  h.Update(VectorizerKindName(kind_));
  h.Update(std::to_string(dimension_));
  if (kind_ == VectorizerKind::kTfidf) {
    for (size_t i = 0; i < terms_.size(); ++i) {
      h.Update(terms_[i]);
      h.Update(idf_[i]);
    }
  } else {
    for (const auto& [id, v] : embeddings_) {
      h.Update(id);
      for (double x : v.values()) h.Update(x);
    }
  }
  return h.Hex();
}

nlohmann::json VectorizerModel::ToJson() const {
  nlohmann::json j = {{"kind", VectorizerKindName(kind_)},
                      {"dimension", dimension_},
                      {"metadata", metadata_},
                      {"fingerprint", Fingerprint()}};
  if (kind_ == VectorizerKind::kTfidf) {
    j["terms"] = terms_;
    j["idf"] = idf_;
  } else {
    nlohmann::json rows = nlohmann::json::object();
    for (const auto& [id, v] : embeddings_) rows[id] = v.ToDense();
    j["embeddings"] = std::move(rows);
  }
  return j;
}

VectorizerModel VectorizerModel::FromJson(const nlohmann::json& j) {
  try {
    VectorizerModel model;
    std::string kind = j.at("kind").get<std::string>();
    model.metadata_ = j.value("metadata", nlohmann::json::object());
    if (kind == "tfidf") {
      model.kind_ = VectorizerKind::kTfidf;
      model.terms_ = j.at("terms").get<std::vector<std::string>>();
      model.idf_ = j.at("idf").get<std::vector<double>>();
      if (model.terms_.size() != model.idf_.size()) {
        throw Error(ErrorCode::kFormat, "terms and idf differ in length");
      }
      model.dimension_ = model.terms_.size();
      model.IndexVocabulary();
    } else if (kind == "external") {
      model.kind_ = VectorizerKind::kExternal;
      model.dimension_ = j.at("dimension").get<size_t>();
      for (const auto& [id, values] : j.at("embeddings").items()) {
        auto dense = values.get<std::vector<double>>();
        if (dense.size() != model.dimension_) {
          throw Error(ErrorCode::kFormat, "embedding dimension mismatch for " + id);
        }
        model.embeddings_.emplace(id, AssayVector::FromDense(dense));
      }
    } else {
      throw Error(ErrorCode::kFormat, "unknown vectorizer kind: " + kind);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad vectorizer model: ") + e.what());
  }
}

void VectorizerModel::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write model: " + path.string());
  out << ToJson().dump() << '\n';
}

VectorizerModel VectorizerModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read model: " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kFormat, "model is not JSON: " + path.string());
  return FromJson(j);
}

void WriteVectors(std::ostream& out, std::span<const IdentifiedVector> rows,
                  bool dense) {
  for (const auto& row : rows) {
    nlohmann::json j = {{"id", row.id}};
    if (dense) {
      j["vector"] = row.vector.ToDense();
    } else {
      j["dim"] = row.vector.dimension();
      j["indices"] = std::vector<uint32_t>(row.vector.indices().begin(),
                                           row.vector.indices().end());
      j["values"] = std::vector<double>(row.vector.values().begin(),
                                        row.vector.values().end());
    }
    out << j.dump() << '\n';
  }
}

std::vector<IdentifiedVector> ReadVectors(std::istream& in) {
  std::vector<IdentifiedVector> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kFormat, "vector row " + std::to_string(line_no) +
                                          ": invalid JSON");
    }
    if (rows.empty() && j.is_object() && j.contains("meta")) continue;
    rows.push_back(ParseVectorRow(j, line_no));
    if (rows.back().vector.dimension() != rows.front().vector.dimension()) {
      throw Error(ErrorCode::kFormat,
                  "vector row " + std::to_string(line_no) + ": dimension mismatch");
    }
  }
  return rows;
}

std::vector<IdentifiedVector> LoadVectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read vectors: " + path.string());
  return ReadVectors(in);
}

}  // namespace assaysem
