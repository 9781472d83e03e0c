// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

// HTTP+JSON facade over the semantifier and the graph store. Routing lives in
// Service::Handle so it can be exercised without a socket.

#ifndef ASSAYSEM_SERVICE_H_
#define ASSAYSEM_SERVICE_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "assaysem/cluster.h"
#include "assaysem/curation.h"
#include "assaysem/error.h"
#include "assaysem/fetch.h"
#include "assaysem/graph_store.h"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace assaysem {

int HttpStatusFor(ErrorCode code);

struct ServiceConfig {
  std::string model_path;
  std::string store_path;
  std::string addr = "127.0.0.1:8080";
  std::string pubmed = "off";  // off | fixture:<dir> | live
  std::string ui_dir;

  // Reads ASSAYSEM_MODEL, ASSAYSEM_STORE, ASSAYSEM_ADDR, ASSAYSEM_PUBMED and
  // ASSAYSEM_UI_DIR; unset variables keep the defaults.
  static ServiceConfig FromEnv();
};

// Throws Error(kInvalidArgument) for an unknown mode.
std::shared_ptr<PubMedClient> MakePubMedClient(const std::string& mode);

struct HttpRequest {
  std::string method;
  std::string path;
  std::multimap<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  nlohmann::json Json() const { return nlohmann::json::parse(body); }
};

namespace bulk_reason {
inline constexpr std::string_view kMissingMetadata = "MISSING_METADATA";
inline constexpr std::string_view kInvalidEntry = "INVALID_ENTRY";
inline constexpr std::string_view kNoAnnotations = "NO_ANNOTATIONS";
inline constexpr std::string_view kNoModel = "NO_MODEL";
inline constexpr std::string_view kBadExternalId = "BAD_EXTERNAL_ID";
inline constexpr std::string_view kDuplicate = "DUPLICATE";
}  // namespace bulk_reason

class Service {
 public:
  Service(std::shared_ptr<GraphStore> store, std::shared_ptr<const Semantifier> model = nullptr,
          std::shared_ptr<PubMedClient> pubmed = nullptr);

  // Every caller holding a snapshot keeps using it across a swap.
  std::shared_ptr<const Semantifier> Model() const;
  void SwapModel(std::shared_ptr<const Semantifier> model);

  HttpResponse Handle(const HttpRequest& request);

  GraphStore& store() { return *store_; }
  SessionManager& sessions() { return sessions_; }

 private:
  HttpResponse Semantify(const nlohmann::json& body);
  HttpResponse CreateSession(const nlohmann::json& body);
  HttpResponse PatchSession(const std::string& id, const nlohmann::json& body);
  HttpResponse InsertSession(const std::string& id, const nlohmann::json& body);
  HttpResponse Bulk(const nlohmann::json& body);
  HttpResponse Compare(const HttpRequest& request);
  HttpResponse LoadModel(const nlohmann::json& body);
  HttpResponse Health() const;

  std::shared_ptr<const Semantifier> RequireModel() const;

  std::shared_ptr<GraphStore> store_;
  std::shared_ptr<PubMedClient> pubmed_;
  mutable std::mutex model_mu_;
  std::shared_ptr<const Semantifier> model_;
  SessionManager sessions_;
  std::atomic<uint64_t> batch_counter_{0};
};

// Socket front end for a Service. `ui_dir`, when non-empty, is served as
// static files under /ui.
class HttpServer {
 public:
  explicit HttpServer(Service& service, const std::string& ui_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 binds an ephemeral port. Returns the bound port; throws
  // Error(kUnavailable) on failure.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  void Run();
  void Stop();

 private:
  std::unique_ptr<httplib::Server> server_;
};

// Parses "host:port". Throws Error(kInvalidArgument).
std::pair<std::string, int> ParseAddr(const std::string& addr);

// Binds `addr` and blocks serving requests.
void Serve(Service& service, const std::string& addr, const std::string& ui_dir = {});

}  // namespace assaysem

#endif  // ASSAYSEM_SERVICE_H_
