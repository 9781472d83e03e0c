// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/fetch.h"

#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include "assaysem/error.h"
#include "httplib.h"

namespace assaysem {

namespace {

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

nlohmann::json ParseBody(const std::string& body, const std::string& url) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kParse, "response is not JSON: " + url);
  return j;
}

}  // namespace

FixtureFetcher::FixtureFetcher(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::ifstream in(dir_ / "index.json");
  if (!in) throw Error(ErrorCode::kIo, "fixture index missing in " + dir_.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kFormat, "fixture index is not a JSON object");
  }
  index_ = j.get<std::map<std::string, std::string>>();
}

std::string FixtureFetcher::Get(const std::string& url) {
  requests_.push_back(url);
  auto it = index_.find(url);
  if (it == index_.end()) throw Error(ErrorCode::kNotFound, "no fixture for " + url);
  std::ifstream in(dir_ / it->second, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read fixture " + it->second);
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

std::string HttpFetcher::Get(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::kInvalidArgument, "unsupported URL: " + url);
  }
  httplib::Client client(m[1].str());
  client.set_follow_location(true);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  auto res = client.Get(m[2].matched ? m[2].str() : "/");
  if (!res) {
    throw Error(ErrorCode::kUnavailable,
                "request failed: " + url + " (" + httplib::to_string(res.error()) + ")");
  }
  if (res->status == 404) throw Error(ErrorCode::kNotFound, "not found: " + url);
  if (res->status != 200) {
    throw Error(ErrorCode::kUnavailable,
                "HTTP " + std::to_string(res->status) + " from " + url);
  }
  return res->body;
}

nlohmann::json ArticleMetadata::ToJson() const {
  return {{"title", title}, {"external_id", external_id}, {"authors", authors}, {"year", year}};
}

ArticleMetadata ArticleMetadata::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kFormat, "article metadata must be an object");
  ArticleMetadata a;
  auto str = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::string();
    if (!it->is_string()) throw Error(ErrorCode::kFormat, std::string(key) + " must be a string");
    return it->get<std::string>();
  };
  a.title = str("title");
  a.external_id = str("external_id");
  a.year = str("year");
  if (auto it = j.find("authors"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::kFormat, "authors must be an array");
    for (const auto& x : *it) {
      if (!x.is_string()) throw Error(ErrorCode::kFormat, "author must be a string");
      a.authors.push_back(x.get<std::string>());
    }
  }
  return a;
}

bool IsWellFormedExternalId(std::string_view id) {
  static const std::regex kPmid(R"(^pmid:[0-9]+$)");
  static const std::regex kDoi(R"(^doi:10\.[0-9]{4,9}/\S+$)");
  std::string s(id);
  return std::regex_match(s, kPmid) || std::regex_match(s, kDoi);
}

std::string PubMedClient::SummaryUrl(const std::string& pmid) {
  return "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esummary.fcgi?db=pubmed&retmode=json&id=" +
         PercentEncode(pmid);
}

std::optional<ArticleMetadata> PubMedClient::Fetch(const std::string& pmid) {
  std::string body;
  try {
    body = fetcher_->Get(SummaryUrl(pmid));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound) return std::nullopt;
    throw;
  }
  auto j = ParseBody(body, SummaryUrl(pmid));
  const auto* entry = j.contains("result") && j["result"].contains(pmid)
                          ? &j["result"][pmid]
                          : nullptr;
  if (entry == nullptr || entry->contains("error") || !entry->contains("title")) {
    return std::nullopt;
  }
  ArticleMetadata a;
  a.external_id = "pmid:" + pmid;
  a.title = (*entry)["title"].get<std::string>();
  if (entry->contains("authors")) {
    for (const auto& author : (*entry)["authors"]) {
      if (author.contains("name")) a.authors.push_back(author["name"].get<std::string>());
    }
  }
  if (entry->contains("pubdate")) a.year = (*entry)["pubdate"].get<std::string>().substr(0, 4);
  return a;
}

std::string PubChemClient::SourceAidsUrl(const std::string& source) {
  return "https://pubchem.ncbi.nlm.nih.gov/rest/pug/assay/sourceall/" + PercentEncode(source) +
         "/aids/JSON";
}

std::string PubChemClient::DescriptionUrl(const std::string& aid) {
  return "https://pubchem.ncbi.nlm.nih.gov/rest/pug/assay/aid/" + PercentEncode(aid) +
         "/description/JSON";
}

std::vector<std::string> PubChemClient::ListAssayIds(const std::string& source) {
  const std::string url = SourceAidsUrl(source);
  auto j = ParseBody(fetcher_->Get(url), url);
  std::vector<std::string> aids;
  try {
    for (const auto& aid : j.at("IdentifierList").at("AID")) {
      aids.push_back(aid.is_string() ? aid.get<std::string>() : std::to_string(aid.get<int64_t>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "unexpected AID list shape: " + std::string(e.what()));
  }
  return aids;
}

nlohmann::json PubChemClient::FetchDescriptions(const std::vector<std::string>& aids) {
  nlohmann::json container = nlohmann::json::array();
  for (const auto& aid : aids) {
    const std::string url = DescriptionUrl(aid);
    auto j = ParseBody(fetcher_->Get(url), url);
    if (!j.contains("PC_AssayContainer") || !j["PC_AssayContainer"].is_array()) {
      throw Error(ErrorCode::kParse, "unexpected description shape for AID " + aid);
    }
    for (auto& entry : j["PC_AssayContainer"]) container.push_back(std::move(entry));
  }
  return {{"PC_AssayContainer", std::move(container)}};
}

}  // namespace assaysem
