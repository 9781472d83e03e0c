// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

// HTTP GET abstraction for the PubChem and PubMed clients. Tests and offline
// runs use FixtureFetcher, which replays recorded responses.

#ifndef ASSAYSEM_FETCH_H_
#define ASSAYSEM_FETCH_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace assaysem {

class Fetcher {
 public:
  virtual ~Fetcher() = default;
  // Returns the response body. Throws Error(kNotFound) for 404 and
  // Error(kUnavailable) for transport failures.
  virtual std::string Get(const std::string& url) = 0;
};

// Replays responses listed in `<dir>/index.json`, a {url: file} object.
class FixtureFetcher : public Fetcher {
 public:
  explicit FixtureFetcher(std::filesystem::path dir);
  std::string Get(const std::string& url) override;

  const std::vector<std::string>& requests() const { return requests_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> index_;
  std::vector<std::string> requests_;
};

// Performs live requests (https supported). Not used by the test suite.
class HttpFetcher : public Fetcher {
 public:
  std::string Get(const std::string& url) override;
};

struct ArticleMetadata {
  std::string title;
  std::string external_id;  // e.g. "pmid:12345" or "doi:10.1000/x"
  std::vector<std::string> authors;
  std::string year;

  nlohmann::json ToJson() const;
  // Throws Error(kFormat) if the object is not an article description.
  static ArticleMetadata FromJson(const nlohmann::json& j);
};

// True for `pmid:<digits>` and `doi:10.<digits>/<suffix>`.
bool IsWellFormedExternalId(std::string_view id);

// Fetches article metadata from the NCBI E-utilities summary endpoint.
class PubMedClient {
 public:
  explicit PubMedClient(std::shared_ptr<Fetcher> fetcher) : fetcher_(std::move(fetcher)) {}

  static std::string SummaryUrl(const std::string& pmid);
  // nullopt when PubMed has no record for the id.
  std::optional<ArticleMetadata> Fetch(const std::string& pmid);

 private:
  std::shared_ptr<Fetcher> fetcher_;
};

// Fetches raw depositor assay descriptions from PubChem's PUG-REST API and
// assembles them into one `{"PC_AssayContainer": [...]}` document.
class PubChemClient {
 public:
  explicit PubChemClient(std::shared_ptr<Fetcher> fetcher) : fetcher_(std::move(fetcher)) {}

  static std::string SourceAidsUrl(const std::string& source);
  static std::string DescriptionUrl(const std::string& aid);

  std::vector<std::string> ListAssayIds(const std::string& source);
  nlohmann::json FetchDescriptions(const std::vector<std::string>& aids);

 private:
  std::shared_ptr<Fetcher> fetcher_;
};

}  // namespace assaysem

#endif  // ASSAYSEM_FETCH_H_
