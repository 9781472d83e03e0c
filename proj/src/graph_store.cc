// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/graph_store.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <sstream>

#include "assaysem/error.h"

namespace assaysem {

namespace {

constexpr std::string_view kAssayPrefix = "urn:assay:";
constexpr std::string_view kPaperPrefix = "urn:paper:";
constexpr std::string_view kPropertyPrefix = "urn:property:";

std::string PercentEncode(std::string_view s) {
  static const char* kHex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::optional<std::string> PercentDecode(std::string_view s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 2 >= s.size()) return std::nullopt;
    int hi = HexValue(s[i + 1]), lo = HexValue(s[i + 2]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<char>(hi * 16 + lo));
    i += 2;
  }
  return out;
}

std::string EscapeLiteral(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04X", static_cast<unsigned>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

void AppendUtf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Minimal N-Triples line reader over one line.
class LineParser {
 public:
  LineParser(std::string_view line, size_t line_no) : s_(line), line_no_(line_no) {}

  Triple Parse() {
    Triple t;
    SkipSpace();
    t.subject = Iri();
    SkipSpace();
    std::string predicate = Iri();
    if (predicate.rfind(kPropertyPrefix, 0) == 0) {
      auto decoded = PercentDecode(std::string_view(predicate).substr(kPropertyPrefix.size()));
      if (!decoded) Fail("bad percent-encoding in predicate");
      t.predicate = *decoded;
    } else {
      t.predicate = predicate;
    }
    SkipSpace();
    if (Peek() == '<') {
      t.object = Iri();
      t.object_is_iri = true;
    } else if (Peek() == '"') {
      t.object = Literal();
    } else {
      Fail("expected IRI or literal object");
    }
    SkipSpace();
    if (Peek() != '.') Fail("expected terminating '.'");
    ++pos_;
    SkipSpace();
    if (pos_ < s_.size() && s_[pos_] != '#') Fail("trailing characters");
    return t;
  }

 private:
  std::string_view s_;
  size_t pos_ = 0;
  size_t line_no_;

  [[noreturn]] void Fail(const std::string& what) {
    throw Error(ErrorCode::kParse, "N-Triples line " + std::to_string(line_no_) + ": " + what);
  }
  char Peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void SkipSpace() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  std::string Iri() {
    if (Peek() != '<') Fail("expected '<'");
    size_t end = s_.find('>', pos_);
    if (end == std::string_view::npos) Fail("unterminated IRI");
    std::string iri(s_.substr(pos_ + 1, end - pos_ - 1));
    if (iri.empty() || iri.find_first_of(" <\"{}|^`\\") != std::string::npos) Fail("invalid IRI");
    pos_ = end + 1;
    return iri;
  }
  uint32_t HexDigits(size_t n) {
    if (pos_ + n > s_.size()) Fail("truncated escape");
    uint32_t cp = 0;
    for (size_t i = 0; i < n; ++i) {
      int h = HexValue(s_[pos_ + i]);
      if (h < 0) Fail("bad hex escape");
      cp = cp * 16 + static_cast<uint32_t>(h);
    }
    pos_ += n;
    return cp;
  }
  std::string Literal() {
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) Fail("unterminated literal");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) Fail("dangling escape");
      char e = s_[pos_++];
      switch (e) {
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 'f': out.push_back('\f'); break;
        case '"': out.push_back('"'); break;
        case '\'': out.push_back('\''); break;
        case '\\': out.push_back('\\'); break;
        case 'u': AppendUtf8(out, HexDigits(4)); break;
        case 'U': AppendUtf8(out, HexDigits(8)); break;
        default: Fail("unknown escape");
      }
    }
    // Tagged and typed literals keep only the lexical form.
    if (Peek() == '@') {
      ++pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-')) ++pos_;
    } else if (Peek() == '^') {
      if (pos_ + 1 >= s_.size() || s_[pos_ + 1] != '^') Fail("bad datatype marker");
      pos_ += 2;
      Iri();
    }
    return out;
  }
};

std::string FormatTriple(const Triple& t) {
  std::string line = "<" + t.subject + "> <" + PropertyIri(t.predicate) + "> ";
  line += t.object_is_iri ? "<" + t.object + ">" : "\"" + EscapeLiteral(t.object) + "\"";
  line += " .\n";
  return line;
}

nlohmann::json TripleJson(const Triple& t) {
  return nlohmann::json::array({t.subject, t.predicate, t.object, t.object_is_iri});
}

}  // namespace

std::string AssayIri(std::string_view assay_id) {
  return std::string(kAssayPrefix) + PercentEncode(assay_id);
}

std::string PaperIri(std::string_view external_id) {
  return std::string(kPaperPrefix) + PercentEncode(external_id);
}

std::string PropertyIri(std::string_view label) {
  return std::string(kPropertyPrefix) + PercentEncode(label);
}

std::optional<std::string> AssayIdFromIri(std::string_view iri) {
  if (iri.rfind(kAssayPrefix, 0) != 0) return std::nullopt;
  return PercentDecode(iri.substr(kAssayPrefix.size()));
}

std::string ToNTriples(std::span<const Triple> triples) {
  std::string out;
  for (const auto& t : triples) out += FormatTriple(t);
  return out;
}

std::vector<Triple> ParseNTriples(std::string_view document) {
  std::vector<Triple> out;
  size_t line_no = 0, begin = 0;
  while (begin < document.size()) {
    size_t end = document.find('\n', begin);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    size_t first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] != '#') {
      out.push_back(LineParser(line, line_no).Parse());
    }
    begin = end + 1;
  }
  return out;
}

nlohmann::json Provenance::ToJson() const {
  return {{"kind", kind}, {"id", id}, {"curator", curator}, {"recorded_at", recorded_at}};
}

Provenance Provenance::FromJson(const nlohmann::json& j) {
  return {j.value("kind", ""), j.value("id", ""), j.value("curator", ""),
          j.value("recorded_at", "")};
}

nlohmann::json Comparison::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (size_t p = 0; p < properties.size(); ++p) {
    nlohmann::json values = nlohmann::json::object();
    for (size_t a = 0; a < assays.size(); ++a) values[assays[a]] = cells[p][a];
    rows.push_back({{"property", properties[p]}, {"values", values}});
  }
  return {{"assays", assays}, {"properties", properties}, {"rows", rows}};
}

GraphStore::GraphStore(std::filesystem::path log_path) : log_path_(std::move(log_path)) {
  if (log_path_.empty()) return;
  if (std::filesystem::exists(log_path_)) {
    std::ifstream in(log_path_);
    if (!in) throw Error(ErrorCode::kIo, "cannot read store log: " + log_path_.string());
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      // A torn final line from an interrupted write is ignored.
      if (j.is_discarded()) {
        if (in.peek() == EOF) break;
        throw Error(ErrorCode::kFormat, "corrupt store log line " + std::to_string(line_no));
      }
      std::vector<Triple> triples;
      for (const auto& t : j.at("triples")) {
        triples.push_back({t.at(0).get<std::string>(), t.at(1).get<std::string>(),
                           t.at(2).get<std::string>(), t.at(3).get<bool>()});
      }
      ApplyLocked(triples, Provenance::FromJson(j.at("provenance")),
                  j.value("contribution", ""), nullptr);
    }
  }
  log_.open(log_path_, std::ios::app);
  if (!log_) throw Error(ErrorCode::kIo, "cannot open store log: " + log_path_.string());
}

void GraphStore::ApplyLocked(std::span<const Triple> triples, const Provenance& provenance,
                             const std::string& key, InsertResult* result) {
  if (!key.empty()) contributions_.insert(key);
  for (const auto& t : triples) {
    auto [it, inserted] = triples_.try_emplace(t);
    it->second.push_back(provenance);
    if (inserted && result) ++result->added;
  }
}

GraphStore::InsertResult GraphStore::Insert(std::span<const Triple> triples,
                                            const Provenance& provenance,
                                            const std::string& contribution_key) {
  std::unique_lock lock(mu_);
  InsertResult result;
  if (!contribution_key.empty() && contributions_.count(contribution_key)) {
    result.duplicate = true;
    return result;
  }
  if (log_.is_open()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& t : triples) rows.push_back(TripleJson(t));
    nlohmann::json entry = {{"triples", rows}, {"provenance", provenance.ToJson()}};
    if (!contribution_key.empty()) entry["contribution"] = contribution_key;
    log_ << entry.dump() << '\n';
    log_.flush();
    if (!log_) throw Error(ErrorCode::kIo, "store log write failed");
  }
  ApplyLocked(triples, provenance, contribution_key, &result);
  return result;
}

bool GraphStore::HasContribution(const std::string& key) const {
  std::shared_lock lock(mu_);
  return contributions_.count(key) > 0;
}

std::vector<Triple> GraphStore::Triples() const {
  std::shared_lock lock(mu_);
  std::vector<Triple> out;
  out.reserve(triples_.size());
  for (const auto& [t, _] : triples_) out.push_back(t);
  return out;
}

std::vector<Provenance> GraphStore::ProvenanceOf(const Triple& triple) const {
  std::shared_lock lock(mu_);
  auto it = triples_.find(triple);
  return it == triples_.end() ? std::vector<Provenance>{} : it->second;
}

size_t GraphStore::size() const {
  std::shared_lock lock(mu_);
  return triples_.size();
}

std::string GraphStore::ExportNTriples() const {
  std::vector<Triple> snapshot = Triples();
  return ToNTriples(snapshot);
}

Comparison GraphStore::Compare(std::span<const std::string> assay_ids,
                               std::span<const std::string> properties) const {
  if (assay_ids.empty()) throw Error(ErrorCode::kInvalidArgument, "no assays to compare");
  std::shared_lock lock(mu_);
  Comparison cmp;
  cmp.assays.assign(assay_ids.begin(), assay_ids.end());
  // property -> per-assay values
  std::map<std::string, std::vector<std::vector<std::string>>> table;
  std::set<std::string> wanted(properties.begin(), properties.end());
  for (size_t a = 0; a < assay_ids.size(); ++a) {
    const std::string iri = AssayIri(assay_ids[a]);
    auto it = triples_.lower_bound(Triple{iri, "", "", false});
    bool any = false;
    for (; it != triples_.end() && it->first.subject == iri; ++it) {
      any = true;
      const Triple& t = it->first;
      if (!wanted.empty() && !wanted.count(t.predicate)) continue;
      auto& row = table[t.predicate];
      row.resize(assay_ids.size());
      row[a].push_back(t.object);
    }
    if (!any) throw Error(ErrorCode::kNotFound, "unknown assay: " + assay_ids[a]);
  }
  for (auto& [property, row] : table) {
    row.resize(assay_ids.size());
    cmp.properties.push_back(property);
    std::vector<std::string> cells;
    for (auto& values : row) {
      std::string joined;
      for (size_t i = 0; i < values.size(); ++i) joined += (i ? "; " : "") + values[i];
      cells.push_back(std::move(joined));
    }
    cmp.cells.push_back(std::move(cells));
  }
  return cmp;
}

}  // namespace assaysem
