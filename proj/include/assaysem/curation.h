// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

// Curation sessions: a semantifier proposal that a curator accepts or
// rejects statement by statement before the accepted part is written to the
// graph.

#ifndef ASSAYSEM_CURATION_H_
#define ASSAYSEM_CURATION_H_

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "assaysem/cluster.h"
#include "assaysem/corpus.h"
#include "assaysem/fetch.h"
#include "assaysem/graph_store.h"
#include "json.hpp"

namespace assaysem {

enum class Decision { kPending, kAccepted, kRejected };
enum class SessionState { kOpen, kInserted, kDiscarded };

std::string_view DecisionName(Decision d);
// Throws Error(kInvalidArgument) for anything but pending/accepted/rejected.
Decision ParseDecision(std::string_view name);
std::string_view SessionStateName(SessionState s);

struct PaperContribution {
  std::optional<ArticleMetadata> article;
  std::string assay_id;
  StatementSet statements;
  bool empty_contribution = false;
  Provenance provenance;

  nlohmann::json ToJson() const;
};

// The triples that record a contribution: one per statement on the assay,
// plus `has contribution` and `title` triples on the paper when present.
std::vector<Triple> ContributionTriples(const PaperContribution& contribution);

struct CurationSession {
  std::string id;
  std::string text;
  std::string assay_id;
  std::string curator;
  SemantificationResult proposal;
  std::map<Statement, Decision> decisions;  // keyed by proposal.statements
  SessionState state = SessionState::kOpen;

  nlohmann::json ToJson() const;
};

struct InsertRequest {
  std::optional<ArticleMetadata> article;
  bool empty_contribution = false;
};

struct InsertOutcome {
  PaperContribution contribution;
  std::vector<Triple> triples;
  CurationSession session;
};

// Thread-safe session registry. Operations on one session are serialized;
// different sessions proceed independently.
class SessionManager {
 public:
  CurationSession Create(std::string text, std::string assay_id, std::string curator,
                         SemantificationResult proposal);
  // Throws Error(kNotFound).
  CurationSession Get(const std::string& id) const;
  // Throws Error(kNotFound), Error(kConflict) unless open, and
  // Error(kInvalidArgument) for a statement outside the proposal. All
  // updates apply or none do.
  CurationSession Decide(const std::string& id,
                         const std::vector<std::pair<Statement, Decision>>& updates);
  // Writes accepted statements with the session's provenance and freezes
  // the session. Zero accepted statements need request.empty_contribution,
  // else Error(kInvalidArgument). Error(kConflict) unless open.
  InsertOutcome Insert(const std::string& id, const InsertRequest& request, GraphStore& store);
  CurationSession Discard(const std::string& id);

 private:
  struct Entry {
    std::mutex mu;
    CurationSession session;
  };
  std::shared_ptr<Entry> Find(const std::string& id) const;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  uint64_t next_id_ = 1;
};

}  // namespace assaysem

#endif  // ASSAYSEM_CURATION_H_
