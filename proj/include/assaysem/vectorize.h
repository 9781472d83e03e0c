// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#ifndef ASSAYSEM_VECTORIZE_H_
#define ASSAYSEM_VECTORIZE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "assaysem/corpus.h"
#include "json.hpp"

namespace assaysem {

using TokenStream = std::vector<std::string>;

// Lowercased tokens split on non-alphanumeric runs. Tokens shorter than two
// characters are dropped, as are pure digit strings.
TokenStream Tokenize(std::string_view text);

// A real vector stored as sorted (index, value) pairs, with a cached
// Euclidean norm. Dense vectors simply store every index.
class AssayVector {
 public:
  AssayVector() = default;

  // Entries may be unsorted; duplicate indices are summed and explicit zeros
  // dropped. Throws Error(kInvalidArgument) if an index is >= dimension.
  static AssayVector FromSparse(size_t dimension,
                                std::vector<std::pair<uint32_t, double>> entries);
  static AssayVector FromDense(std::span<const double> values);

  size_t dimension() const { return dimension_; }
  size_t nnz() const { return indices_.size(); }
  double norm() const { return norm_; }
  bool is_zero() const { return indices_.empty(); }
  std::span<const uint32_t> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }

  double Dot(std::span<const double> dense) const;
  double Dot(const AssayVector& other) const;
  std::vector<double> ToDense() const;

  bool operator==(const AssayVector&) const = default;

 private:
  size_t dimension_ = 0;
  std::vector<uint32_t> indices_;
  std::vector<double> values_;
  double norm_ = 0.0;

  void RecomputeNorm();
};

enum class VectorizerKind { kTfidf, kExternal };

std::string_view VectorizerKindName(VectorizerKind kind);

// Either a TF-IDF model fitted on training texts, or a lookup table of
// precomputed per-assay embeddings. Immutable once built.
class VectorizerModel {
 public:
  // idf(t) = ln((1 + N) / (1 + df(t))) + 1. Vocabulary indices follow the
  // lexicographic order of terms. Throws Error(kFit) if no document has a
  // token.
  static VectorizerModel FitTfidf(std::span<const std::string> train_texts);

  // Throws Error(kFormat) on malformed rows or mismatched dimensions;
  // Error(kIo) if unreadable.
  static VectorizerModel LoadEmbeddings(const std::filesystem::path& path);
  static VectorizerModel ParseEmbeddings(std::istream& in);

  VectorizerKind kind() const { return kind_; }
  size_t dimension() const { return dimension_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  size_t embedding_count() const { return embeddings_.size(); }
  const nlohmann::json& metadata() const { return metadata_; }

  // Vocabulary index of a term, or -1.
  int64_t TermIndex(std::string_view term) const;

  // TF-IDF: raw counts times idf, L2-normalized; out-of-vocabulary tokens are
  // ignored. External: embedding lookup by record id, throwing
  // Error(kMissingEmbedding) when the id is absent.
  AssayVector Transform(const BioassayRecord& record) const;
  // TF-IDF only; external models throw Error(kUnsupported).
  AssayVector TransformText(std::string_view text) const;
  // External only; throws Error(kMissingEmbedding).
  const AssayVector& Lookup(std::string_view id) const;
  bool HasEmbedding(std::string_view id) const;

  // Hex FNV-1a digest of the fitted state.
  std::string Fingerprint() const;

  nlohmann::json ToJson() const;
  static VectorizerModel FromJson(const nlohmann::json& j);
  void Save(const std::filesystem::path& path) const;
  static VectorizerModel Load(const std::filesystem::path& path);

 private:
  VectorizerKind kind_ = VectorizerKind::kTfidf;
  size_t dimension_ = 0;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, uint32_t> vocabulary_;
  std::vector<double> idf_;
  std::map<std::string, AssayVector, std::less<>> embeddings_;
  nlohmann::json metadata_ = nlohmann::json::object();

  void IndexVocabulary();
};

struct IdentifiedVector {
  std::string id;
  AssayVector vector;
};

// Vector files are JSON Lines. Each row is either dense, `{"id", "vector"}`,
// or sparse, `{"id", "dim", "indices", "values"}`. A leading `{"meta": ...}`
// row is allowed and skipped.
void WriteVectors(std::ostream& out, std::span<const IdentifiedVector> rows,
                  bool dense);
std::vector<IdentifiedVector> ReadVectors(std::istream& in);
std::vector<IdentifiedVector> LoadVectors(const std::filesystem::path& path);

}  // namespace assaysem

#endif  // ASSAYSEM_VECTORIZE_H_
