// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

// Annotated bioassay records and the deterministic fold splitter.

#ifndef ASSAYSEM_CORPUS_H_
#define ASSAYSEM_CORPUS_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace assaysem {

// Collapses whitespace runs to one space and lowercases ASCII. Idempotent.
std::string NormalizeLabel(std::string_view label);

// One ontology-derived property/value pair. The assay it describes is the
// implicit subject. Both fields are always stored normalized.
class Statement {
 public:
  // Normalizes both labels; throws Error(kInvalidArgument) if either is empty
  // after normalization.
  Statement(std::string_view property, std::string_view value);

  const std::string& property() const { return property_; }
  const std::string& value() const { return value_; }

  auto operator<=>(const Statement&) const = default;
  bool operator==(const Statement&) const = default;

 private:
  std::string property_;
  std::string value_;
};

using StatementSet = std::set<Statement>;

struct BioassayRecord {
  std::string id;
  std::string text;
  StatementSet statements;  // empty for unlabeled assays
  std::vector<std::string> article_refs;
};

nlohmann::json RecordToJson(const BioassayRecord& record);
// Throws Error(kFormat) on schema violations.
BioassayRecord RecordFromJson(const nlohmann::json& j);

struct LoadIssue {
  size_t line = 0;  // 1-based
  std::string reason;
};

struct LoadReport {
  size_t lines = 0;  // non-blank lines seen
  size_t parsed = 0;
  std::vector<LoadIssue> issues;
};

enum class CorpusFormat { kJsonLines };

std::optional<CorpusFormat> ParseCorpusFormat(std::string_view tag);

class Corpus {
 public:
  Corpus() = default;
  // Throws Error(kInvalidArgument) on duplicate ids.
  explicit Corpus(std::vector<BioassayRecord> records, std::string source = {},
                  LoadReport report = {});

  const std::vector<BioassayRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const BioassayRecord* Find(std::string_view id) const;
  // Copies the records with the given ids, in the order given. Throws
  // Error(kNotFound) for an unknown id.
  std::vector<BioassayRecord> Select(std::span<const std::string> ids) const;
  std::vector<std::string> Ids() const;

  const std::string& source() const { return source_; }
  const std::string& loaded_at() const { return loaded_at_; }
  const LoadReport& load_report() const { return report_; }

 private:
  std::vector<BioassayRecord> records_;
  std::unordered_map<std::string, size_t> index_;
  std::string source_;
  std::string loaded_at_;
  LoadReport report_;
};

// Parses JSON Lines. Malformed lines and duplicate ids are collected in the
// load report. Throws Error(kEmptyCorpus) if nothing parses.
Corpus ParseCorpus(std::istream& in, std::string source = "<stream>");
// Throws Error(kIo) if the file cannot be read.
Corpus LoadCorpus(const std::filesystem::path& path,
                  CorpusFormat format = CorpusFormat::kJsonLines);

void WriteCorpus(std::ostream& out, std::span<const BioassayRecord> records);
void SaveCorpus(const std::filesystem::path& path,
                std::span<const BioassayRecord> records);

struct FoldSplit {
  size_t fold_index = 0;
  std::vector<std::string> train_ids;  // sorted
  std::vector<std::string> test_ids;   // sorted
  uint64_t seed = 0;
};

nlohmann::json FoldToJson(const FoldSplit& fold);

// Seeded shuffle of the corpus ids followed by contiguous slicing into
// k_folds test partitions; the first n % k_folds partitions take one extra
// record. Throws Error(kInvalidArgument) if k_folds < 2 or k_folds > n.
std::vector<FoldSplit> MakeFolds(const Corpus& corpus, size_t k_folds,
                                 uint64_t seed);

struct CorpusStats {
  size_t records = 0;
  size_t labeled_records = 0;
  size_t unique_statements = 0;
  size_t unique_properties = 0;
  size_t total_statements = 0;
  size_t min_statements = 0;
  double mean_statements = 0.0;
  size_t max_statements = 0;
};

// Throws Error(kEmptyCorpus) on an empty corpus.
CorpusStats ComputeCorpusStats(const Corpus& corpus);
nlohmann::json StatsToJson(const CorpusStats& stats);

// Builds a canonical corpus from a directory of `<id>.txt` description files
// and a tab-separated annotation file with `id<TAB>property<TAB>value` rows.
// Assays without a text file are reported on `missing_text`.
struct ConvertResult {
  std::vector<BioassayRecord> records;
  std::vector<std::string> missing_text;
  std::vector<size_t> bad_rows;  // 1-based annotation line numbers
};
ConvertResult ConvertAnnotatedDirectory(const std::filesystem::path& text_dir,
                                        const std::filesystem::path& annotations);

}  // namespace assaysem

#endif  // ASSAYSEM_CORPUS_H_
