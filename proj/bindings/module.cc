// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "assaysem/baseline.h"
#include "assaysem/cluster.h"
#include "assaysem/corpus.h"
#include "assaysem/error.h"
#include "assaysem/evaluate.h"
#include "assaysem/graph_store.h"
#include "assaysem/ingest.h"
#include "assaysem/service.h"
#include "assaysem/vectorize.h"

namespace py = pybind11;
using namespace assaysem;
using nlohmann::json;

namespace {

py::object ToPy(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json FromPy(const py::handle& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

GridLayout ParseLayout(const std::string& layout) {
  if (layout == "runs") return GridLayout::kRuns;
  if (layout == "table1") return GridLayout::kTable1;
  if (layout == "table2") return GridLayout::kTable2;
  throw Error(ErrorCode::kInvalidArgument, "unknown layout: " + layout);
}

py::dict ReportToPy(const EvalReport& r) {
  py::dict d;
  d["method"] = std::string(MethodName(r.config.method));
  d["vectorizer"] = r.config.vectorizer;
  d["k"] = r.config.k;
  d["threshold"] = r.config.threshold;
  d["seed"] = r.config.seed;
  d["fold"] = r.config.fold;
  d["include_test"] = r.config.include_test;
  d["tp"] = r.metrics.tp;
  d["fp"] = r.metrics.fp;
  d["fn"] = r.metrics.fn;
  d["precision"] = r.metrics.precision;
  d["recall"] = r.metrics.recall;
  d["f1"] = r.metrics.f1;
  d["metadata"] = ToPy(r.metadata);
  return d;
}

struct PyService {
  std::shared_ptr<Service> service;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bioassay semantification engine";

  py::exception<Error>(m, "AssaysemError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::module_::import("assaysem._core").attr("AssaysemError");
      py::object exc = type(py::str(e.what()));
      exc.attr("code") = std::string(ErrorCodeName(e.code()));
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  m.def("tokenize", [](const std::string& text) { return Tokenize(text); }, py::arg("text"));
  m.def("normalize_label", [](const std::string& s) { return NormalizeLabel(s); });

  py::class_<Corpus>(m, "Corpus")
      .def_static("load", [](const std::filesystem::path& p) { return LoadCorpus(p); }, py::arg("path"))
      .def_static("from_records",
                  [](const py::list& rows) {
                    std::vector<BioassayRecord> records;
                    for (const auto& row : rows) records.push_back(RecordFromJson(FromPy(row)));
                    return Corpus(std::move(records), "<python>");
                  })
      .def("__len__", &Corpus::size)
      .def("ids", &Corpus::Ids)
      .def("records", [](const Corpus& c) {
        py::list out;
        for (const auto& r : c.records()) out.append(ToPy(RecordToJson(r)));
        return out;
      })
      .def("stats", [](const Corpus& c) { return ToPy(StatsToJson(ComputeCorpusStats(c))); })
      .def("folds",
           [](const Corpus& c, size_t k_folds, uint64_t seed) {
             py::list out;
             for (const auto& f : MakeFolds(c, k_folds, seed)) out.append(ToPy(FoldToJson(f)));
             return out;
           },
           py::arg("k_folds") = 3, py::arg("seed") = 0)
      .def("save", [](const Corpus& c, const std::filesystem::path& p) { SaveCorpus(p, c.records()); });

  py::class_<Semantifier, std::shared_ptr<Semantifier>>(m, "Semantifier")
      .def_static("fit",
                  [](const Corpus& corpus, size_t k, uint64_t seed, size_t max_iter, double tol) {
                    py::gil_scoped_release release;
                    return std::make_shared<Semantifier>(
                        FitSemantifier(corpus.records(), {k, seed, max_iter, tol}));
                  },
                  py::arg("corpus"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 300,
                  py::arg("tol") = 1e-6)
      .def_static("load",
                  [](const std::filesystem::path& p) { return std::make_shared<Semantifier>(Semantifier::Load(p)); })
      .def("save", &Semantifier::Save)
      .def_property_readonly("k", [](const Semantifier& s) { return s.clusters.k; })
      .def_property_readonly("inertia", [](const Semantifier& s) { return s.clusters.inertia; })
      .def_property_readonly("fingerprint", [](const Semantifier& s) { return s.vectorizer.Fingerprint(); })
      .def("semantify",
           [](const Semantifier& s, const std::string& text, uint32_t threshold) {
             return ToPy(s.SemantifyText(text, threshold).ToJson());
           },
           py::arg("text"), py::arg("threshold") = 1);

  m.def("micro_metrics", [](const py::list& pairs) {
    std::vector<PredictionPair> in;
    auto statements = [](const py::handle& seq) {
      StatementSet out;
      for (const auto& s : seq) {
        auto t = s.cast<std::pair<std::string, std::string>>();
        out.emplace(t.first, t.second);
      }
      return out;
    };
    for (const auto& p : pairs) {
      auto t = p.cast<py::tuple>();
      in.push_back({"", statements(t[0]), statements(t[1])});
    }
    Metrics mt = MicroMetrics(in);
    py::dict d;
    d["tp"] = mt.tp;
    d["fp"] = mt.fp;
    d["fn"] = mt.fn;
    d["precision"] = mt.precision;
    d["recall"] = mt.recall;
    d["f1"] = mt.f1;
    return d;
  }, py::arg("pairs"), "Each pair is (predicted, gold), both iterables of (property, value).");

  m.def("run_grid",
        [](const Corpus& corpus, const std::string& method, std::vector<size_t> ks,
           std::vector<uint32_t> thresholds, size_t folds, uint64_t seed, bool include_test,
           size_t threads, const std::string& embeddings) {
          GridSpec spec;
          if (method == "naive") {
            spec.method = Method::kNaive;
            spec.top_ns = std::move(ks);
          } else if (method == "cluster") {
            spec.ks = std::move(ks);
          } else {
            throw Error(ErrorCode::kInvalidArgument, "unknown method: " + method);
          }
          spec.thresholds = std::move(thresholds);
          spec.seed = seed;
          spec.include_test = include_test;
          spec.threads = threads;
          if (!embeddings.empty()) {
            spec.vectorizer.kind = VectorizerKind::kExternal;
            spec.vectorizer.embeddings =
                std::make_shared<VectorizerModel>(VectorizerModel::LoadEmbeddings(embeddings));
          }
          std::vector<EvalReport> reports;
          {
            py::gil_scoped_release release;
            reports = RunGrid(corpus, MakeFolds(corpus, folds, seed), spec);
          }
          py::list out;
          for (const auto& r : reports) out.append(ReportToPy(r));
          return out;
        },
        py::arg("corpus"), py::arg("method") = "cluster", py::arg("ks") = std::vector<size_t>{},
        py::arg("thresholds") = std::vector<uint32_t>{1}, py::arg("folds") = 3, py::arg("seed") = 0,
        py::arg("include_test") = false, py::arg("threads") = 1, py::arg("embeddings") = "");

  m.def("emit_grid",
        [](const py::list& reports, const std::string& layout) {
          std::vector<EvalReport> in;
          for (const auto& item : reports) {
            auto d = item.cast<py::dict>();
            EvalReport r;
            r.config.method = d["method"].cast<std::string>() == "naive" ? Method::kNaive : Method::kCluster;
            r.config.vectorizer = d["vectorizer"].cast<std::string>();
            r.config.k = d["k"].cast<size_t>();
            r.config.threshold = d["threshold"].cast<uint32_t>();
            r.config.seed = d["seed"].cast<uint64_t>();
            r.config.fold = d["fold"].cast<int>();
            r.config.include_test = d["include_test"].cast<bool>();
            r.metrics = MetricsFromCounts(d["tp"].cast<uint64_t>(), d["fp"].cast<uint64_t>(),
                                          d["fn"].cast<uint64_t>());
            r.metrics.precision = d["precision"].cast<std::optional<double>>();
            r.metrics.recall = d["recall"].cast<std::optional<double>>();
            r.metrics.f1 = d["f1"].cast<double>();
            r.metadata = FromPy(d["metadata"]);
            in.push_back(std::move(r));
          }
          return EmitResultGrid(in, ParseLayout(layout));
        },
        py::arg("reports"), py::arg("layout") = "runs");

  m.def("ingest",
        [](const std::filesystem::path& path, const std::string& source, const std::string& profile) {
          SourceProfile p = profile.empty() ? SourceProfile::Builtin(source) : SourceProfile::Load(profile);
          IngestResult r = ToBioassayRecords(ParseDepositorFile(path, p), p);
          return py::make_tuple(Corpus(r.records, path.string()), ToPy(r.report.ToJson()));
        },
        py::arg("path"), py::arg("source") = "scripps", py::arg("profile") = "");

  m.def("to_ntriples", [](const std::vector<std::tuple<std::string, std::string, std::string, bool>>& rows) {
    std::vector<Triple> triples;
    for (const auto& [s, p, o, iri] : rows) triples.push_back({s, p, o, iri});
    return ToNTriples(triples);
  });
  m.def("assay_iri", [](const std::string& id) { return AssayIri(id); });

  py::class_<PyService>(m, "Service")
      .def(py::init([](const std::string& store_path, const std::string& model_path,
                       const std::string& pubmed) {
             auto store = std::make_shared<GraphStore>(store_path);
             std::shared_ptr<const Semantifier> model;
             if (!model_path.empty()) model = std::make_shared<Semantifier>(Semantifier::Load(model_path));
             return PyService{std::make_shared<Service>(store, model, MakePubMedClient(pubmed))};
           }),
           py::arg("store_path") = "", py::arg("model_path") = "", py::arg("pubmed") = "off")
      .def("set_model", [](PyService& s, const std::shared_ptr<Semantifier>& model) {
        s.service->SwapModel(model);
      })
      .def("handle",
           [](PyService& s, const std::string& method, const std::string& path, const py::object& body,
              const std::map<std::string, std::string>& query) {
             HttpRequest req{method, path, {query.begin(), query.end()}, ""};
             if (!body.is_none()) {
               req.body = py::isinstance<py::str>(body) ? body.cast<std::string>() : FromPy(body).dump();
             }
             HttpResponse res;
             {
               py::gil_scoped_release release;
               res = s.service->Handle(req);
             }
             py::object payload = py::str(res.body);
             if (res.content_type == "application/json") payload = ToPy(json::parse(res.body));
             return py::make_tuple(res.status, res.content_type, payload);
           },
           py::arg("method"), py::arg("path"), py::arg("body") = py::none(),
           py::arg("query") = std::map<std::string, std::string>{})
      .def_property_readonly("triple_count", [](PyService& s) { return s.service->store().size(); });
}
