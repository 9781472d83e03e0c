// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

// Depositor record ingestion: locate the description sections of each assay
// in a depositor's JSON response and turn them into unlabeled records.
//
// Where the sections live is described by a source profile, a small JSON
// document of JSON-pointer paths:
//
//   {
//     "name": "scripps",
//     "format": "json",
//     "records": "/PC_AssayContainer",
//     "id": "/assay/descr/aid/id",
//     "source_name": "/assay/descr/aid_source/db/name",
//     "sections": [
//       {"name": "overview", "pointers": ["/assay/descr/description"],
//        "heading": "Assay Overview:"},
//       {"name": "protocol", "pointers": ["/assay/descr/protocol"],
//        "heading": "Protocol Summary:"}
//     ],
//     "article_refs": {"array": "/assay/descr/xref", "item": "/xref/pmid",
//                      "prefix": "pmid:"}
//   }
//
// A section value may be a string or an array of strings (one per line).
// With a heading, the section runs from the heading line to the next heading
// line (a short line ending in ':') or the end of the value.

#ifndef ASSAYSEM_INGEST_H_
#define ASSAYSEM_INGEST_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "assaysem/corpus.h"
#include "json.hpp"

namespace assaysem {

struct SectionSpec {
  std::string name;
  std::vector<std::string> pointers;  // tried in order
  std::string heading;                // empty: take the whole value
};

struct SourceProfile {
  std::string name;
  std::string records_pointer;  // "" when the document root is the array
  std::string id_pointer;
  std::string source_name_pointer;
  std::vector<SectionSpec> sections;
  std::string refs_array_pointer;
  std::string refs_item_pointer;
  std::string refs_prefix;

  // Throws Error(kUnsupportedSource) for non-JSON formats and
  // Error(kFormat) for malformed profiles.
  static SourceProfile FromJson(const nlohmann::json& j);
  static SourceProfile Load(const std::filesystem::path& path);
  // Built-in profiles by name; throws Error(kUnsupportedSource) if unknown.
  static SourceProfile Builtin(std::string_view name);
};

struct DepositorRecord {
  std::string source;
  std::string assay_id;
  nlohmann::json raw;  // the depositor entry as parsed
  std::vector<std::string> article_refs;
};

namespace reason {
inline constexpr std::string_view kMissingId = "MISSING_ID";
inline constexpr std::string_view kNoText = "NO_TEXT";
inline constexpr std::string_view kDuplicateId = "DUPLICATE_ID";
}  // namespace reason

struct Unparseable {
  std::string assay_id;  // "#<entry index>" when the entry has no id
  std::string reason;
};

struct DepositorParse {
  std::vector<DepositorRecord> records;
  std::vector<Unparseable> rejected;  // entries dropped while parsing
  size_t total = 0;                   // entries in the document
};

struct ExtractionReport {
  size_t total = 0;
  size_t extracted = 0;
  std::vector<Unparseable> unparseable;

  nlohmann::json ToJson() const;
};

// Throws Error(kParse) with a byte offset for malformed JSON, Error(kIo) if
// unreadable, and Error(kFormat) if the records pointer does not resolve to
// an array.
DepositorParse ParseDepositorDocument(std::string_view document,
                                      const SourceProfile& profile);
DepositorParse ParseDepositorFile(const std::filesystem::path& path,
                                  const SourceProfile& profile);

// Overview and protocol sections joined by a blank line, in profile order;
// nullopt when no section is present.
std::optional<std::string> ExtractText(const DepositorRecord& record,
                                       const SourceProfile& profile);

struct IngestResult {
  std::vector<BioassayRecord> records;
  ExtractionReport report;
};

// Every input entry ends up either in `records` or in the report's
// unparseable list.
IngestResult ToBioassayRecords(const DepositorParse& parsed, const SourceProfile& profile);

}  // namespace assaysem

#endif  // ASSAYSEM_INGEST_H_
