// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/ingest.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "assaysem/error.h"

namespace assaysem {

namespace {

constexpr std::string_view kScrippsProfile = R"({
  "name": "scripps",
  "format": "json",
  "records": "/PC_AssayContainer",
  "id": "/assay/descr/aid/id",
  "source_name": "/assay/descr/aid_source/db/name",
  "sections": [
    {"name": "overview", "pointers": ["/assay/descr/description"], "heading": "Assay Overview:"},
    {"name": "protocol", "pointers": ["/assay/descr/protocol", "/assay/descr/description"],
     "heading": "Protocol Summary:"}
  ],
  "article_refs": {"array": "/assay/descr/xref", "item": "/xref/pmid", "prefix": "pmid:"}
})";

const nlohmann::json* Resolve(const nlohmann::json& doc, const std::string& pointer) {
  if (pointer.empty()) return &doc;
  try {
    nlohmann::json::json_pointer ptr(pointer);
    if (!doc.contains(ptr)) return nullptr;
    return &doc.at(ptr);
  } catch (const nlohmann::json::exception&) {
    return nullptr;
  }
}

std::string Trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> Lines(const nlohmann::json& value) {
  std::vector<std::string> lines;
  auto split = [&lines](const std::string& s) {
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  };
  if (value.is_string()) {
    split(value.get<std::string>());
  } else if (value.is_array()) {
    for (const auto& item : value) {
      if (item.is_string()) split(item.get<std::string>());
    }
  }
  return lines;
}

bool StartsWithNoCase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

bool IsHeadingLine(const std::string& trimmed) {
  return !trimmed.empty() && trimmed.size() <= 60 && trimmed.back() == ':' &&
         std::isupper(static_cast<unsigned char>(trimmed.front()));
}

std::optional<std::string> ExtractSection(const nlohmann::json& raw, const SectionSpec& spec) {
  for (const auto& pointer : spec.pointers) {
    const nlohmann::json* value = Resolve(raw, pointer);
    if (value == nullptr) continue;
    std::vector<std::string> lines = Lines(*value);
    std::vector<std::string> body;
    if (spec.heading.empty()) {
      body = lines;
    } else {
      bool inside = false;
      for (const auto& line : lines) {
        std::string t = Trim(line);
        if (!inside) {
          if (StartsWithNoCase(t, spec.heading)) {
            inside = true;
            std::string rest = Trim(std::string_view(t).substr(spec.heading.size()));
            if (!rest.empty()) body.push_back(rest);
          }
          continue;
        }
        if (IsHeadingLine(t)) break;
        body.push_back(line);
      }
    }
    // Drop leading and trailing blank lines.
    while (!body.empty() && Trim(body.front()).empty()) body.erase(body.begin());
    while (!body.empty() && Trim(body.back()).empty()) body.pop_back();
    if (body.empty()) continue;
    std::string text;
    for (size_t i = 0; i < body.size(); ++i) {
      if (i) text.push_back('\n');
      text += body[i];
    }
    return text;
  }
  return std::nullopt;
}

std::optional<std::string> ScalarString(const nlohmann::json* v) {
  if (v == nullptr) return std::nullopt;
  if (v->is_string()) {
    std::string s = Trim(v->get<std::string>());
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
  }
  if (v->is_number_integer()) return std::to_string(v->get<int64_t>());
  if (v->is_number_unsigned()) return std::to_string(v->get<uint64_t>());
  return std::nullopt;
}

}  // namespace

SourceProfile SourceProfile::FromJson(const nlohmann::json& j) {
  try {
    std::string format = j.value("format", "json");
    if (format != "json") {
      throw Error(ErrorCode::kUnsupportedSource, "source format not supported: " + format);
    }
    SourceProfile p;
    p.name = j.at("name").get<std::string>();
    p.records_pointer = j.value("records", "");
    p.id_pointer = j.at("id").get<std::string>();
    p.source_name_pointer = j.value("source_name", "");
    for (const auto& s : j.at("sections")) {
      SectionSpec spec;
      spec.name = s.at("name").get<std::string>();
      if (s.contains("pointers")) {
        spec.pointers = s.at("pointers").get<std::vector<std::string>>();
      } else {
        spec.pointers = {s.at("pointer").get<std::string>()};
      }
      spec.heading = s.value("heading", "");
      p.sections.push_back(std::move(spec));
    }
    if (p.sections.empty()) throw Error(ErrorCode::kFormat, "profile defines no sections");
    if (j.contains("article_refs")) {
      const auto& refs = j.at("article_refs");
      p.refs_array_pointer = refs.at("array").get<std::string>();
      p.refs_item_pointer = refs.value("item", "");
      p.refs_prefix = refs.value("prefix", "");
    }
    // Validate every pointer once so bad profiles fail early.
    auto check = [](const std::string& ptr) {
      if (!ptr.empty()) nlohmann::json::json_pointer validate(ptr);
    };
    check(p.records_pointer);
    check(p.id_pointer);
    check(p.source_name_pointer);
    check(p.refs_array_pointer);
    check(p.refs_item_pointer);
    for (const auto& s : p.sections) {
      for (const auto& ptr : s.pointers) check(ptr);
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad source profile: ") + e.what());
  }
}

SourceProfile SourceProfile::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read profile: " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kFormat, "profile is not JSON: " + path.string());
  return FromJson(j);
}

SourceProfile SourceProfile::Builtin(std::string_view name) {
  if (name == "scripps") return FromJson(nlohmann::json::parse(kScrippsProfile));
  throw Error(ErrorCode::kUnsupportedSource, "unknown source profile: " + std::string(name));
}

nlohmann::json ExtractionReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& u : unparseable) rows.push_back({{"id", u.assay_id}, {"reason", u.reason}});
  return {{"total", total}, {"extracted", extracted}, {"unparseable", rows}};
}

DepositorParse ParseDepositorDocument(std::string_view document, const SourceProfile& profile) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                "malformed depositor document at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  const nlohmann::json* entries = Resolve(doc, profile.records_pointer);
  if (entries == nullptr || !entries->is_array()) {
    throw Error(ErrorCode::kFormat, "records pointer '" + profile.records_pointer +
                                        "' does not resolve to an array");
  }
  DepositorParse out;
  out.total = entries->size();
  for (size_t i = 0; i < entries->size(); ++i) {
    const nlohmann::json& entry = (*entries)[i];
    auto id = ScalarString(Resolve(entry, profile.id_pointer));
    if (!id) {
      out.rejected.push_back({"#" + std::to_string(i), std::string(reason::kMissingId)});
      continue;
    }
    DepositorRecord r;
    r.assay_id = *id;
    r.raw = entry;
    r.source = ScalarString(Resolve(entry, profile.source_name_pointer)).value_or(profile.name);
    if (!profile.refs_array_pointer.empty()) {
      const nlohmann::json* refs = Resolve(entry, profile.refs_array_pointer);
      if (refs != nullptr && refs->is_array()) {
        std::set<std::string> seen;
        for (const auto& ref : *refs) {
          auto value = ScalarString(Resolve(ref, profile.refs_item_pointer));
          if (value && seen.insert(*value).second) {
            r.article_refs.push_back(profile.refs_prefix + *value);
          }
        }
      }
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

DepositorParse ParseDepositorFile(const std::filesystem::path& path, const SourceProfile& profile) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read depositor file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseDepositorDocument(buf.str(), profile);
}

std::optional<std::string> ExtractText(const DepositorRecord& record,
                                       const SourceProfile& profile) {
  std::string text;
  for (const auto& spec : profile.sections) {
    auto section = ExtractSection(record.raw, spec);
    if (!section) continue;
    if (!text.empty()) text += "\n\n";
    text += *section;
  }
  if (text.empty()) return std::nullopt;
  return text;
}

IngestResult ToBioassayRecords(const DepositorParse& parsed, const SourceProfile& profile) {
  IngestResult out;
  out.report.total = parsed.total;
  out.report.unparseable = parsed.rejected;
  std::set<std::string> seen;
  for (const auto& r : parsed.records) {
    if (!seen.insert(r.assay_id).second) {
      out.report.unparseable.push_back({r.assay_id, std::string(reason::kDuplicateId)});
      continue;
    }
    auto text = ExtractText(r, profile);
    if (!text) {
      out.report.unparseable.push_back({r.assay_id, std::string(reason::kNoText)});
      continue;
    }
    out.records.push_back({r.assay_id, std::move(*text), {}, r.article_refs});
  }
  out.report.extracted = out.records.size();
  return out;
}

}  // namespace assaysem
