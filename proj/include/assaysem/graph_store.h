// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#ifndef ASSAYSEM_GRAPH_STORE_H_
#define ASSAYSEM_GRAPH_STORE_H_

#include <compare>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace assaysem {

// Subjects and IRI objects are full IRIs; predicates are property labels
// that are minted into `urn:property:` IRIs on export.
struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
  bool object_is_iri = false;

  auto operator<=>(const Triple&) const = default;
  bool operator==(const Triple&) const = default;
};

std::string AssayIri(std::string_view assay_id);
std::string PaperIri(std::string_view external_id);
std::string PropertyIri(std::string_view label);

// Inverse of AssayIri; nullopt for other IRIs.
std::optional<std::string> AssayIdFromIri(std::string_view iri);

std::string ToNTriples(std::span<const Triple> triples);
// Throws Error(kParse) with the offending line number.
std::vector<Triple> ParseNTriples(std::string_view document);

struct Provenance {
  std::string kind;  // "session" or "batch"
  std::string id;
  std::string curator;
  std::string recorded_at;

  nlohmann::json ToJson() const;
  static Provenance FromJson(const nlohmann::json& j);
};

struct Comparison {
  std::vector<std::string> assays;
  std::vector<std::string> properties;
  // cells[property index][assay index]; values joined by "; ", blank when
  // the assay has no value for the property.
  std::vector<std::vector<std::string>> cells;

  nlohmann::json ToJson() const;
};

// In-memory triple set backed by an append-only JSON Lines log. Writes are
// serialized; reads run concurrently against a consistent view.
class GraphStore {
 public:
  // An empty path keeps the store in memory only. Otherwise the log is
  // replayed and then appended to. Throws Error(kIo/kFormat).
  explicit GraphStore(std::filesystem::path log_path = {});

  struct InsertResult {
    size_t added = 0;
    bool duplicate = false;  // contribution key was already present
  };

  // Adds triples with provenance. A non-empty contribution key is recorded;
  // inserting the same key twice writes nothing and reports duplicate.
  // Identical triples are stored once and gain an extra provenance entry.
  InsertResult Insert(std::span<const Triple> triples, const Provenance& provenance,
                      const std::string& contribution_key = {});

  bool HasContribution(const std::string& key) const;
  std::vector<Triple> Triples() const;
  std::vector<Provenance> ProvenanceOf(const Triple& triple) const;
  size_t size() const;

  std::string ExportNTriples() const;
  // Throws Error(kNotFound) for an assay with no triples and
  // Error(kInvalidArgument) for an empty assay list.
  Comparison Compare(std::span<const std::string> assay_ids,
                     std::span<const std::string> properties) const;

 private:
  mutable std::shared_mutex mu_;
  std::map<Triple, std::vector<Provenance>> triples_;
  std::set<std::string> contributions_;
  std::filesystem::path log_path_;
  std::ofstream log_;

  void ApplyLocked(std::span<const Triple> triples, const Provenance& provenance,
                   const std::string& key, InsertResult* result);
};

}  // namespace assaysem

#endif  // ASSAYSEM_GRAPH_STORE_H_
