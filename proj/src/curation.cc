// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/curation.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "assaysem/error.h"

namespace assaysem {

namespace {

std::string NowIso8601() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream oss;
  oss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return oss.str();
}

nlohmann::json StatementsJson(const StatementSet& statements) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : statements) out.push_back({{"property", s.property()}, {"value", s.value()}});
  return out;
}

}  // namespace

std::string_view DecisionName(Decision d) {
  switch (d) {
    case Decision::kPending: return "pending";
    case Decision::kAccepted: return "accepted";
    case Decision::kRejected: return "rejected";
  }
  return "pending";
}

Decision ParseDecision(std::string_view name) {
  if (name == "pending") return Decision::kPending;
  if (name == "accepted" || name == "accept") return Decision::kAccepted;
  if (name == "rejected" || name == "reject") return Decision::kRejected;
  throw Error(ErrorCode::kInvalidArgument, "unknown decision: " + std::string(name));
}

std::string_view SessionStateName(SessionState s) {
  switch (s) {
    case SessionState::kOpen: return "open";
    case SessionState::kInserted: return "inserted";
    case SessionState::kDiscarded: return "discarded";
  }
  return "open";
}

nlohmann::json PaperContribution::ToJson() const {
  return {{"article", article ? article->ToJson() : nlohmann::json(nullptr)},
          {"assay_id", assay_id},
          {"statements", StatementsJson(statements)},
          {"empty_contribution", empty_contribution},
          {"provenance", provenance.ToJson()}};
}

std::vector<Triple> ContributionTriples(const PaperContribution& contribution) {
  std::vector<Triple> triples;
  const std::string assay = AssayIri(contribution.assay_id);
  for (const auto& s : contribution.statements) {
    triples.push_back({assay, s.property(), s.value(), false});
  }
  if (contribution.article && !contribution.article->external_id.empty()) {
    const std::string paper = PaperIri(contribution.article->external_id);
    triples.push_back({paper, "has contribution", assay, true});
    if (!contribution.article->title.empty()) {
      triples.push_back({paper, "title", contribution.article->title, false});
    }
  }
  return triples;
}

nlohmann::json CurationSession::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [s, d] : decisions) {
    rows.push_back({{"property", s.property()}, {"value", s.value()}, {"decision", DecisionName(d)}});
  }
  return {{"id", id},
          {"text", text},
          {"assay_id", assay_id},
          {"curator", curator},
          {"state", SessionStateName(state)},
          {"proposal", proposal.ToJson()},
          {"decisions", rows}};
}

std::shared_ptr<SessionManager::Entry> SessionManager::Find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session: " + id);
  return it->second;
}

CurationSession SessionManager::Create(std::string text, std::string assay_id,
                                       std::string curator, SemantificationResult proposal) {
  auto entry = std::make_shared<Entry>();
  std::lock_guard lock(mu_);
  char id[32];
  std::snprintf(id, sizeof(id), "s%06llu", static_cast<unsigned long long>(next_id_++));
  CurationSession& s = entry->session;
  s.id = id;
  s.text = std::move(text);
  s.assay_id = assay_id.empty() ? "session-" + s.id : std::move(assay_id);
  s.curator = std::move(curator);
  s.proposal = std::move(proposal);
  for (const auto& st : s.proposal.statements) s.decisions.emplace(st, Decision::kPending);
  sessions_.emplace(s.id, entry);
  return s;
}

CurationSession SessionManager::Get(const std::string& id) const {
  auto entry = Find(id);
  std::lock_guard lock(entry->mu);
  return entry->session;
}

CurationSession SessionManager::Decide(
    const std::string& id, const std::vector<std::pair<Statement, Decision>>& updates) {
  auto entry = Find(id);
  std::lock_guard lock(entry->mu);
  CurationSession& s = entry->session;
  if (s.state != SessionState::kOpen) {
    throw Error(ErrorCode::kConflict, "session " + id + " is " +
                                          std::string(SessionStateName(s.state)));
  }
  for (const auto& [statement, decision] : updates) {
    if (!s.decisions.count(statement)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "statement not in proposal: " + statement.property() + " -> " +
                      statement.value());
    }
  }
  for (const auto& [statement, decision] : updates) s.decisions[statement] = decision;
  return s;
}

InsertOutcome SessionManager::Insert(const std::string& id, const InsertRequest& request,
                                     GraphStore& store) {
  auto entry = Find(id);
  std::lock_guard lock(entry->mu);
  CurationSession& s = entry->session;
  if (s.state != SessionState::kOpen) {
    throw Error(ErrorCode::kConflict, "session " + id + " is " +
                                          std::string(SessionStateName(s.state)));
  }
  if (request.article && !request.article->external_id.empty() &&
      !IsWellFormedExternalId(request.article->external_id)) {
    throw Error(ErrorCode::kInvalidArgument,
                "malformed article external id: " + request.article->external_id);
  }
  InsertOutcome out;
  PaperContribution& c = out.contribution;
  c.article = request.article;
  c.assay_id = s.assay_id;
  for (const auto& [statement, decision] : s.decisions) {
    if (decision == Decision::kAccepted) c.statements.insert(statement);
  }
  if (c.statements.empty() && !request.empty_contribution) {
    throw Error(ErrorCode::kInvalidArgument,
                "no accepted statements; set empty_contribution to insert anyway");
  }
  c.empty_contribution = c.statements.empty();
  c.provenance = {"session", s.id, s.curator, NowIso8601()};
  out.triples = ContributionTriples(c);
  store.Insert(out.triples, c.provenance, "session:" + s.id);
  s.state = SessionState::kInserted;
  out.session = s;
  return out;
}

CurationSession SessionManager::Discard(const std::string& id) {
  auto entry = Find(id);
  std::lock_guard lock(entry->mu);
  CurationSession& s = entry->session;
  if (s.state != SessionState::kOpen) {
    throw Error(ErrorCode::kConflict, "session " + id + " is " +
                                          std::string(SessionStateName(s.state)));
  }
  s.state = SessionState::kDiscarded;
  return s;
}

}  // namespace assaysem
