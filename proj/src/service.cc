// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/service.h"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "httplib.h"

namespace assaysem {

namespace {

using nlohmann::json;

HttpResponse JsonResponse(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

HttpResponse ErrorResponse(int status, std::string_view code, const std::string& message) {
  return JsonResponse(status, {{"error", {{"code", code}, {"message", message}}}});
}

std::string NowIso8601() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream oss;
  oss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return oss.str();
}

std::string Fnv1aHex(std::string_view data) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> SplitPath(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

std::vector<std::string> SplitCommas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<std::string> QueryList(const HttpRequest& request, const std::string& key) {
  std::vector<std::string> out;
  auto [b, e] = request.query.equal_range(key);
  for (auto it = b; it != e; ++it) {
    for (auto& v : SplitCommas(it->second)) out.push_back(std::move(v));
  }
  return out;
}

json ParseBody(const std::string& body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kInvalidArgument, "request body is not valid JSON");
  return j;
}

uint32_t ThresholdFrom(const json& body) {
  if (!body.contains("threshold")) return 1;
  const json& t = body.at("threshold");
  if (!t.is_number_integer() || t.get<int64_t>() < 1 || t.get<int64_t>() > UINT32_MAX) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must be a positive integer");
  }
  return static_cast<uint32_t>(t.get<int64_t>());
}

std::string StringField(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return {};
  if (it->is_number_integer()) return std::to_string(it->get<int64_t>());
  if (!it->is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(key) + " must be a string");
  }
  return it->get<std::string>();
}

bool IsBlank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

Statement StatementFromJson(const json& j) {
  if (!j.is_object() || !j.contains("property") || !j.contains("value") ||
      !j.at("property").is_string() || !j.at("value").is_string()) {
    throw Error(ErrorCode::kInvalidArgument, "statement needs string property and value");
  }
  return Statement(j.at("property").get<std::string>(), j.at("value").get<std::string>());
}

json TriplesJson(const std::vector<Triple>& triples) {
  json out = json::array();
  for (const auto& t : triples) {
    out.push_back({{"subject", t.subject},
                   {"predicate", t.predicate},
                   {"object", t.object},
                   {"object_is_iri", t.object_is_iri}});
  }
  return out;
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kFormat:
    case ErrorCode::kParse:
    case ErrorCode::kEmptyCorpus:
      return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kMissingEmbedding:
    case ErrorCode::kUnsupported:
    case ErrorCode::kUnsupportedSource:
      return 422;
    case ErrorCode::kUnavailable: return 503;
    default: return 500;
  }
}

ServiceConfig ServiceConfig::FromEnv() {
  ServiceConfig c;
  auto read = [](const char* name, std::string& field) {
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') field = v;
  };
  read("ASSAYSEM_MODEL", c.model_path);
  read("ASSAYSEM_STORE", c.store_path);
  read("ASSAYSEM_ADDR", c.addr);
  read("ASSAYSEM_PUBMED", c.pubmed);
  read("ASSAYSEM_UI_DIR", c.ui_dir);
  return c;
}

std::shared_ptr<PubMedClient> MakePubMedClient(const std::string& mode) {
  if (mode.empty() || mode == "off") return nullptr;
  if (mode == "live") return std::make_shared<PubMedClient>(std::make_shared<HttpFetcher>());
  constexpr std::string_view kFixture = "fixture:";
  if (mode.rfind(kFixture, 0) == 0) {
    return std::make_shared<PubMedClient>(
        std::make_shared<FixtureFetcher>(mode.substr(kFixture.size())));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown pubmed mode: " + mode);
}

Service::Service(std::shared_ptr<GraphStore> store, std::shared_ptr<const Semantifier> model,
                 std::shared_ptr<PubMedClient> pubmed)
    : store_(std::move(store)), pubmed_(std::move(pubmed)), model_(std::move(model)) {
  if (!store_) store_ = std::make_shared<GraphStore>();
}

std::shared_ptr<const Semantifier> Service::Model() const {
  std::lock_guard lock(model_mu_);
  return model_;
}

void Service::SwapModel(std::shared_ptr<const Semantifier> model) {
  std::lock_guard lock(model_mu_);
  model_.swap(model);
}

std::shared_ptr<const Semantifier> Service::RequireModel() const {
  auto model = Model();
  if (!model) throw Error(ErrorCode::kUnavailable, "no semantifier model loaded");
  return model;
}

HttpResponse Service::Handle(const HttpRequest& request) {
  const auto parts = SplitPath(request.path);
  const std::string& m = request.method;
  try {
    if (parts.size() == 1 && parts[0] == "health" && m == "GET") return Health();
    if (parts.size() == 1 && parts[0] == "semantify" && m == "POST") {
      return Semantify(ParseBody(request.body));
    }
    if (parts.size() == 1 && parts[0] == "sessions" && m == "POST") {
      return CreateSession(ParseBody(request.body));
    }
    if (parts.size() == 2 && parts[0] == "sessions") {
      if (m == "GET") return JsonResponse(200, sessions_.Get(parts[1]).ToJson());
      if (m == "PATCH") return PatchSession(parts[1], ParseBody(request.body));
    }
    if (parts.size() == 3 && parts[0] == "sessions" && m == "POST") {
      if (parts[2] == "insert") return InsertSession(parts[1], ParseBody(request.body));
      if (parts[2] == "discard") return JsonResponse(200, sessions_.Discard(parts[1]).ToJson());
    }
    if (parts.size() == 1 && parts[0] == "bulk" && m == "POST") return Bulk(ParseBody(request.body));
    if (parts.size() == 2 && parts[0] == "export" && parts[1] == "ntriples" && m == "GET") {
      return {200, "application/n-triples", store_->ExportNTriples()};
    }
    if (parts.size() == 1 && parts[0] == "compare" && m == "GET") return Compare(request);
    if (parts.size() == 1 && parts[0] == "model" && m == "POST") {
      return LoadModel(ParseBody(request.body));
    }
    return ErrorResponse(404, "NOT_FOUND", "no route for " + m + " " + request.path);
  } catch (const Error& e) {
    return ErrorResponse(HttpStatusFor(e.code()), ErrorCodeName(e.code()), e.what());
  } catch (const json::exception& e) {
    return ErrorResponse(400, "INVALID_ARGUMENT", e.what());
  }
}

HttpResponse Service::Health() const {
  auto model = Model();
  json j = {{"status", "ok"}, {"model_loaded", model != nullptr}, {"triples", store_->size()}};
  if (model) {
    j["k"] = model->clusters.k;
    j["vectorizer"] = VectorizerKindName(model->vectorizer.kind());
    j["fingerprint"] = model->vectorizer.Fingerprint();
  }
  return JsonResponse(200, j);
}

HttpResponse Service::Semantify(const json& body) {
  const std::string text = StringField(body, "text");
  const uint32_t threshold = ThresholdFrom(body);
  if (IsBlank(text)) throw Error(ErrorCode::kInvalidArgument, "text must be non-empty");
  auto model = RequireModel();
  return JsonResponse(200, model->SemantifyText(text, threshold).ToJson());
}

HttpResponse Service::CreateSession(const json& body) {
  const std::string text = StringField(body, "text");
  const uint32_t threshold = ThresholdFrom(body);
  if (IsBlank(text)) throw Error(ErrorCode::kInvalidArgument, "text must be non-empty");
  auto model = RequireModel();
  auto proposal = model->SemantifyText(text, threshold);
  std::string curator = StringField(body, "curator");
  if (curator.empty()) curator = "anonymous";
  auto session = sessions_.Create(text, StringField(body, "assay_id"), curator, std::move(proposal));
  return JsonResponse(201, session.ToJson());
}

HttpResponse Service::PatchSession(const std::string& id, const json& body) {
  if (!body.contains("decisions") || !body.at("decisions").is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "decisions must be an array");
  }
  std::vector<std::pair<Statement, Decision>> updates;
  for (const auto& d : body.at("decisions")) {
    if (!d.contains("decision") || !d.at("decision").is_string()) {
      throw Error(ErrorCode::kInvalidArgument, "each decision needs a decision string");
    }
    updates.emplace_back(StatementFromJson(d), ParseDecision(d.at("decision").get<std::string>()));
  }
  return JsonResponse(200, sessions_.Decide(id, updates).ToJson());
}

HttpResponse Service::InsertSession(const std::string& id, const json& body) {
  InsertRequest req;
  if (body.contains("article") && !body.at("article").is_null()) {
    req.article = ArticleMetadata::FromJson(body.at("article"));
  }
  if (body.contains("empty_contribution")) {
    req.empty_contribution = body.at("empty_contribution").get<bool>();
  }
  auto out = sessions_.Insert(id, req, *store_);
  return JsonResponse(200, {{"contribution", out.contribution.ToJson()},
                            {"triples", TriplesJson(out.triples)},
                            {"ntriples", ToNTriples(out.triples)},
                            {"session", out.session.ToJson()}});
}

HttpResponse Service::Bulk(const json& body) {
  const json* entries = nullptr;
  if (body.is_array()) {
    entries = &body;
  } else if (body.is_object() && body.contains("entries")) {
    entries = &body.at("entries");
  }
  if (entries == nullptr || !entries->is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "bulk body must be an array or {\"entries\": [...]}");
  }
  if (entries->empty()) throw Error(ErrorCode::kInvalidArgument, "bulk entries must be non-empty");

  const json options = body.is_object() ? body : json::object();
  std::string batch_id = StringField(options, "batch_id");
  if (batch_id.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "batch-%06llu",
                  static_cast<unsigned long long>(++batch_counter_));
    batch_id = buf + std::string("-") + NowIso8601();
  }
  std::string curator = StringField(options, "curator");
  if (curator.empty()) curator = "bulk-import";
  const uint32_t threshold = ThresholdFrom(options);
  const Provenance provenance{"batch", batch_id, curator, NowIso8601()};
  auto model = Model();

  json rows = json::array();
  std::map<std::string, size_t> tally = {
      {"inserted", 0}, {"semantified_then_inserted", 0}, {"failed", 0}, {"duplicate", 0}};
  for (size_t i = 0; i < entries->size(); ++i) {
    const json& entry = (*entries)[i];
    json row = {{"index", i}};
    auto fail = [&](std::string_view reason, const std::string& detail = {}) {
      row["outcome"] = "failed";
      row["reason"] = reason;
      if (!detail.empty()) row["detail"] = detail;
    };
    try {
      if (!entry.is_object()) {
        fail(bulk_reason::kInvalidEntry, "entry must be an object");
      } else {
        PaperContribution c;
        c.provenance = provenance;
        c.assay_id = StringField(entry, "assay_id");
        const std::string text = StringField(entry, "text");
        const bool has_statements = entry.contains("statements") && !entry.at("statements").is_null();
        if (entry.contains("article") && !entry.at("article").is_null()) {
          c.article = ArticleMetadata::FromJson(entry.at("article"));
        } else if (std::string pmid = StringField(entry, "pmid"); !pmid.empty() && pubmed_) {
          c.article = pubmed_->Fetch(pmid);
        }
        if (!c.article || (c.article->external_id.empty() && c.article->title.empty())) {
          fail(bulk_reason::kMissingMetadata);
        } else if (!c.article->external_id.empty() &&
                   !IsWellFormedExternalId(c.article->external_id)) {
          fail(bulk_reason::kBadExternalId, c.article->external_id);
        } else if (!has_statements && IsBlank(text)) {
          fail(bulk_reason::kInvalidEntry, "entry needs text or statements");
        } else {
          std::string outcome = "inserted";
          if (has_statements) {
            const json& st = entry.at("statements");
            if (!st.is_array()) throw Error(ErrorCode::kInvalidArgument, "statements must be an array");
            for (const auto& s : st) c.statements.insert(StatementFromJson(s));
          }
          bool ok = true;
          if (c.statements.empty() && !has_statements) {
            if (!model) {
              fail(bulk_reason::kNoModel);
              ok = false;
            } else {
              auto result = model->SemantifyText(text, threshold);
              c.statements.insert(result.statements.begin(), result.statements.end());
              outcome = "semantified_then_inserted";
            }
          }
          if (ok && c.statements.empty()) {
            fail(bulk_reason::kNoAnnotations);
            ok = false;
          }
          if (ok) {
            if (c.assay_id.empty()) {
              std::string canon = text;
              for (const auto& s : c.statements) canon += "\x1f" + s.property() + "\x1e" + s.value();
              c.assay_id = "anon-" + Fnv1aHex(canon);
            }
            const std::string key = "contribution:" + c.article->external_id + "|" +
                                    c.article->title + "|" + c.assay_id;
            auto triples = ContributionTriples(c);
            auto res = store_->Insert(triples, provenance, key);
            row["assay_id"] = c.assay_id;
            if (res.duplicate) {
              row["outcome"] = "duplicate";
              row["reason"] = bulk_reason::kDuplicate;
            } else {
              row["outcome"] = outcome;
              row["statements"] = c.statements.size();
              row["triples"] = triples.size();
            }
          }
        }
      }
    } catch (const Error& e) {
      fail(e.code() == ErrorCode::kUnavailable ? bulk_reason::kMissingMetadata
                                               : bulk_reason::kInvalidEntry,
           e.what());
    } catch (const json::exception& e) {
      fail(bulk_reason::kInvalidEntry, e.what());
    }
    ++tally[row["outcome"].get<std::string>()];
    rows.push_back(std::move(row));
  }
  json report = {{"batch_id", batch_id}, {"total", entries->size()}, {"entries", rows}};
  for (const auto& [k, v] : tally) report[k] = v;
  return JsonResponse(200, report);
}

HttpResponse Service::Compare(const HttpRequest& request) {
  auto assays = QueryList(request, "assays");
  auto properties = QueryList(request, "property");
  for (auto& p : QueryList(request, "properties")) properties.push_back(std::move(p));
  for (auto& p : properties) p = NormalizeLabel(p);
  return JsonResponse(200, store_->Compare(assays, properties).ToJson());
}

HttpResponse Service::LoadModel(const json& body) {
  const std::string path = StringField(body, "path");
  if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "path must be non-empty");
  auto model = std::make_shared<const Semantifier>(Semantifier::Load(path));
  SwapModel(model);
  return JsonResponse(200, {{"loaded", path},
                            {"k", model->clusters.k},
                            {"fingerprint", model->vectorizer.Fingerprint()}});
}

std::pair<std::string, int> ParseAddr(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "addr must be host:port");
  try {
    size_t used = 0;
    int port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1 || port < 0 || port > 65535) throw std::out_of_range(addr);
    return {addr.substr(0, colon), port};
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in addr: " + addr);
  }
}

HttpServer::HttpServer(Service& service, const std::string& ui_dir)
    : server_(std::make_unique<httplib::Server>()) {
  if (!ui_dir.empty() && !server_->set_mount_point("/ui", ui_dir)) {
    throw Error(ErrorCode::kIo, "cannot mount ui directory: " + ui_dir);
  }
  auto adapt = [&service](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    HttpResponse out = service.Handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  const char* pattern = R"(/(health|semantify|sessions.*|bulk|export/.*|compare|model))";
  server_->Get(pattern, adapt);
  server_->Post(pattern, adapt);
  server_->Patch(pattern, adapt);
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::kUnavailable, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::Run() { server_->listen_after_bind(); }

void HttpServer::Stop() {
  if (server_) server_->stop();
}

void Serve(Service& service, const std::string& addr, const std::string& ui_dir) {
  auto [host, port] = ParseAddr(addr);
  HttpServer server(service, ui_dir);
  server.Bind(host, port);
  server.Run();
}

}  // namespace assaysem
