// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/corpus.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "assaysem/error.h"
#include "assaysem/random.h"

namespace assaysem {

namespace {

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string NowIso8601() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream oss;
  oss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return oss.str();
}

}  // namespace

std::string NormalizeLabel(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  bool pending_space = false;
  for (unsigned char c : label) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return out;
}

Statement::Statement(std::string_view property, std::string_view value)
    : property_(NormalizeLabel(property)), value_(NormalizeLabel(value)) {
  if (property_.empty() || value_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "statement property and value must be non-empty");
  }
}

nlohmann::json RecordToJson(const BioassayRecord& record) {
  nlohmann::json statements = nlohmann::json::array();
  for (const auto& s : record.statements) {
    statements.push_back({{"property", s.property()}, {"value", s.value()}});
  }
  nlohmann::json j = {
      {"id", record.id}, {"text", record.text}, {"statements", statements}};
  if (!record.article_refs.empty()) j["article_refs"] = record.article_refs;
  return j;
}

BioassayRecord RecordFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kFormat, "record is not an object");
  BioassayRecord r;
  auto id = j.find("id");
  if (id == j.end() || !(id->is_string() || id->is_number_integer())) {
    throw Error(ErrorCode::kFormat, "missing or non-string id");
  }
  r.id = id->is_string() ? id->get<std::string>() : std::to_string(id->get<int64_t>());
  if (r.id.empty()) throw Error(ErrorCode::kFormat, "empty id");
  auto text = j.find("text");
  if (text == j.end() || !text->is_string()) {
    throw Error(ErrorCode::kFormat, "missing or non-string text");
  }
  r.text = text->get<std::string>();
  if (auto st = j.find("statements"); st != j.end()) {
    if (!st->is_array()) throw Error(ErrorCode::kFormat, "statements is not an array");
    for (const auto& s : *st) {
      if (!s.is_object() || !s.contains("property") || !s.contains("value") ||
          !s["property"].is_string() || !s["value"].is_string()) {
        throw Error(ErrorCode::kFormat, "statement needs string property and value");
      }
      try {
        r.statements.emplace(s["property"].get<std::string>(),
                             s["value"].get<std::string>());
      } catch (const Error& e) {
        throw Error(ErrorCode::kFormat, e.what());
      }
    }
  }
  if (auto refs = j.find("article_refs"); refs != j.end()) {
    if (!refs->is_array()) throw Error(ErrorCode::kFormat, "article_refs is not an array");
    for (const auto& a : *refs) {
      if (!a.is_string()) throw Error(ErrorCode::kFormat, "article ref is not a string");
      r.article_refs.push_back(a.get<std::string>());
    }
  }
  return r;
}

std::optional<CorpusFormat> ParseCorpusFormat(std::string_view tag) {
  if (tag == "jsonl" || tag == "json-lines") return CorpusFormat::kJsonLines;
  return std::nullopt;
}

Corpus::Corpus(std::vector<BioassayRecord> records, std::string source,
               LoadReport report)
    : records_(std::move(records)),
      source_(std::move(source)),
      loaded_at_(NowIso8601()),
      report_(std::move(report)) {
  index_.reserve(records_.size());
  for (size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].id, i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate record id: " + records_[i].id);
    }
  }
}

const BioassayRecord* Corpus::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<BioassayRecord> Corpus::Select(std::span<const std::string> ids) const {
  std::vector<BioassayRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const BioassayRecord* r = Find(id);
    if (r == nullptr) throw Error(ErrorCode::kNotFound, "unknown record id: " + id);
    out.push_back(*r);
  }
  return out;
}

std::vector<std::string> Corpus::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(records_.size());
  for (const auto& r : records_) ids.push_back(r.id);
  return ids;
}

Corpus ParseCorpus(std::istream& in, std::string source) {
  LoadReport report;
  std::vector<BioassayRecord> records;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(),
                    [](unsigned char c) { return IsSpace(c); })) {
      continue;
    }
    ++report.lines;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      report.issues.push_back({line_no, "invalid JSON"});
      continue;
    }
    try {
      BioassayRecord r = RecordFromJson(j);
      if (!seen.insert(r.id).second) {
        report.issues.push_back({line_no, "duplicate id " + r.id});
        continue;
      }
      records.push_back(std::move(r));
    } catch (const Error& e) {
      report.issues.push_back({line_no, e.what()});
    }
  }
  report.parsed = records.size();
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "no parseable records in " + source);
  }
  return Corpus(std::move(records), std::move(source), std::move(report));
}

Corpus LoadCorpus(const std::filesystem::path& path, CorpusFormat format) {
  (void)format;  // JSON Lines is the only canonical format.
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read corpus file: " + path.string());
  return ParseCorpus(in, path.string());
}

void WriteCorpus(std::ostream& out, std::span<const BioassayRecord> records) {
  for (const auto& r : records) out << RecordToJson(r).dump() << '\n';
}

void SaveCorpus(const std::filesystem::path& path,
                std::span<const BioassayRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write corpus file: " + path.string());
  WriteCorpus(out, records);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

nlohmann::json FoldToJson(const FoldSplit& fold) {
  return {{"fold_index", fold.fold_index},
          {"seed", fold.seed},
          {"train_ids", fold.train_ids},
          {"test_ids", fold.test_ids}};
}

std::vector<FoldSplit> MakeFolds(const Corpus& corpus, size_t k_folds,
                                 uint64_t seed) {
  const size_t n = corpus.size();
  if (k_folds < 2) throw Error(ErrorCode::kInvalidArgument, "k_folds must be >= 2");
  if (k_folds > n) {
    throw Error(ErrorCode::kInvalidArgument, "k_folds exceeds corpus size");
  }
  std::vector<std::string> ids = corpus.Ids();
  // Shuffle from a canonical order so the split does not depend on file order.
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.Shuffle(ids);

  std::vector<FoldSplit> folds(k_folds);
  size_t begin = 0;
  for (size_t f = 0; f < k_folds; ++f) {
    size_t len = n / k_folds + (f < n % k_folds ? 1 : 0);
    FoldSplit& fold = folds[f];
    fold.fold_index = f;
    fold.seed = seed;
    fold.test_ids.assign(ids.begin() + begin, ids.begin() + begin + len);
    fold.train_ids.reserve(n - len);
    fold.train_ids.insert(fold.train_ids.end(), ids.begin(), ids.begin() + begin);
    fold.train_ids.insert(fold.train_ids.end(), ids.begin() + begin + len, ids.end());
    std::sort(fold.test_ids.begin(), fold.test_ids.end());
    std::sort(fold.train_ids.begin(), fold.train_ids.end());
    begin += len;
  }
  return folds;
}

CorpusStats ComputeCorpusStats(const Corpus& corpus) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus is empty");
  CorpusStats stats;
  StatementSet unique;
  std::set<std::string> properties;
  stats.records = corpus.size();
  stats.min_statements = corpus.records().front().statements.size();
  for (const auto& r : corpus.records()) {
    size_t m = r.statements.size();
    if (m > 0) ++stats.labeled_records;
    stats.total_statements += m;
    stats.min_statements = std::min(stats.min_statements, m);
    stats.max_statements = std::max(stats.max_statements, m);
    for (const auto& s : r.statements) {
      unique.insert(s);
      properties.insert(s.property());
    }
  }
  stats.unique_statements = unique.size();
  stats.unique_properties = properties.size();
  stats.mean_statements =
      static_cast<double>(stats.total_statements) / static_cast<double>(stats.records);
  return stats;
}

nlohmann::json StatsToJson(const CorpusStats& stats) {
  return {{"records", stats.records},
          {"labeled_records", stats.labeled_records},
          {"unique_statements", stats.unique_statements},
          {"unique_properties", stats.unique_properties},
          {"total_statements", stats.total_statements},
          {"min_statements", stats.min_statements},
          {"mean_statements", stats.mean_statements},
          {"max_statements", stats.max_statements}};
}

ConvertResult ConvertAnnotatedDirectory(const std::filesystem::path& text_dir,
                                        const std::filesystem::path& annotations) {
  std::ifstream in(annotations);
  if (!in) throw Error(ErrorCode::kIo, "cannot read annotations: " + annotations.string());
  ConvertResult result;
  std::map<std::string, StatementSet> by_id;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    size_t t1 = line.find('\t');
    size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      result.bad_rows.push_back(line_no);
      continue;
    }
    std::string id = line.substr(0, t1);
    while (!id.empty() && IsSpace(id.back())) id.pop_back();
    id.erase(0, std::min(id.size(), id.find_first_not_of(" \t")));
    try {
      by_id[id].emplace(line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1));
    } catch (const Error&) {
      result.bad_rows.push_back(line_no);
    }
  }
  for (auto& [id, statements] : by_id) {
    std::ifstream text_in(text_dir / (id + ".txt"));
    if (!text_in) {
      result.missing_text.push_back(id);
      continue;
    }
    std::ostringstream text;
    text << text_in.rdbuf();
    result.records.push_back({id, text.str(), std::move(statements), {}});
  }
  return result;
}

}  // namespace assaysem
