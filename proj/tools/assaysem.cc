// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

// Command-line front end for the assaysem library.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "assaysem/baseline.h"
#include "assaysem/cluster.h"
#include "assaysem/corpus.h"
#include "assaysem/error.h"
#include "assaysem/evaluate.h"
#include "assaysem/ingest.h"
#include "assaysem/service.h"
#include "assaysem/vectorize.h"

namespace {

using namespace assaysem;

// "a:b:s" (inclusive) or "a,b,c".
std::vector<size_t> ParseSizes(const std::string& spec) {
  std::vector<size_t> out;
  try {
    if (spec.find(':') != std::string::npos) {
      size_t a = 0, b = 0, s = 1;
      char c1 = 0, c2 = 0;
      std::istringstream in(spec);
      in >> a >> c1 >> b;
      if (in >> c2) in >> s;
      if (c1 != ':' || s == 0 || b < a) throw std::invalid_argument(spec);
      for (size_t v = a; v <= b; v += s) out.push_back(v);
    } else {
      std::istringstream in(spec);
      std::string item;
      while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(std::stoul(item));
      }
    }
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad list or range: " + spec);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "empty list or range: " + spec);
  return out;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    OpenOut(path) << text;
  }
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

VectorizerSpec ParseVectorizer(const std::string& spec) {
  VectorizerSpec v;
  if (spec == "tfidf") return v;
  constexpr std::string_view kPrefix = "embedding:";
  if (spec.rfind(kPrefix, 0) == 0) {
    v.kind = VectorizerKind::kExternal;
    v.embeddings = std::make_shared<const VectorizerModel>(
        VectorizerModel::LoadEmbeddings(spec.substr(kPrefix.size())));
    return v;
  }
  throw Error(ErrorCode::kInvalidArgument, "vectorizer must be tfidf or embedding:<file>");
}

void PrintLoadReport(const Corpus& corpus) {
  const LoadReport& r = corpus.load_report();
  std::cerr << corpus.source() << ": " << r.parsed << "/" << r.lines << " lines parsed";
  if (!r.issues.empty()) std::cerr << ", " << r.issues.size() << " issues";
  std::cerr << "\n";
  for (const auto& issue : r.issues) std::cerr << "  line " << issue.line << ": " << issue.reason << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"assaysem: bioassay semantification by clustering"};
  app.require_subcommand(1);

  // corpus
  auto* corpus_cmd = app.add_subcommand("corpus", "Inspect and build corpora");
  corpus_cmd->require_subcommand(1);
  std::string corpus_path, out_path, text_dir, annotations_path;
  auto* stats_cmd = corpus_cmd->add_subcommand("stats", "Print corpus statistics as JSON");
  stats_cmd->add_option("--corpus", corpus_path)->required();
  auto* validate_cmd = corpus_cmd->add_subcommand("validate", "Report malformed corpus lines");
  validate_cmd->add_option("--corpus", corpus_path)->required();
  auto* convert_cmd = corpus_cmd->add_subcommand("convert", "Build a corpus from text files and TSV annotations");
  convert_cmd->add_option("--texts", text_dir, "Directory of <id>.txt files")->required();
  convert_cmd->add_option("--annotations", annotations_path, "id<TAB>property<TAB>value rows")->required();
  convert_cmd->add_option("--out", out_path)->required();
  size_t n_folds = 3;
  uint64_t seed = 0;
  auto* folds_cmd = corpus_cmd->add_subcommand("folds", "Print the fold partition as JSON");
  folds_cmd->add_option("--corpus", corpus_path)->required();
  folds_cmd->add_option("--folds", n_folds);
  folds_cmd->add_option("--seed", seed);

  // vectorize
  auto* vec_cmd = app.add_subcommand("vectorize", "Fit and apply vectorizers");
  vec_cmd->require_subcommand(1);
  std::string model_path, vectors_path;
  bool dense = false;
  auto* vfit_cmd = vec_cmd->add_subcommand("fit", "Fit TF-IDF on a corpus");
  vfit_cmd->add_option("--corpus", corpus_path)->required();
  vfit_cmd->add_option("--out", out_path)->required();
  auto* vtrans_cmd = vec_cmd->add_subcommand("transform", "Vectorize a corpus");
  vtrans_cmd->add_option("--model", model_path, "TF-IDF model or embeddings file")->required();
  vtrans_cmd->add_option("--corpus", corpus_path)->required();
  vtrans_cmd->add_option("--out", out_path)->required();
  vtrans_cmd->add_flag("--dense", dense);
  bool embeddings_flag = false;
  vtrans_cmd->add_flag("--embeddings", embeddings_flag, "Treat --model as an embeddings file");

  // cluster
  auto* cl_cmd = app.add_subcommand("cluster", "K-means models");
  cl_cmd->require_subcommand(1);
  size_t k = 0;
  size_t max_iter = 300;
  double tol = 1e-6;
  std::string vectorizer_path, text, text_file, k_range;
  uint32_t threshold = 1;
  auto* cfit_cmd = cl_cmd->add_subcommand("fit", "Fit K-means on vectors");
  cfit_cmd->add_option("--vectors", vectors_path)->required();
  cfit_cmd->add_option("--k", k)->required();
  cfit_cmd->add_option("--seed", seed);
  cfit_cmd->add_option("--max-iter", max_iter);
  cfit_cmd->add_option("--tol", tol);
  cfit_cmd->add_option("--corpus", corpus_path, "Attach statement frequencies from this corpus");
  cfit_cmd->add_option("--vectorizer", vectorizer_path, "Bundle with this TF-IDF model into a semantifier");
  cfit_cmd->add_option("--out", out_path)->required();
  auto* csem_cmd = cl_cmd->add_subcommand("semantify", "Predict statements for a text");
  csem_cmd->add_option("--model", model_path, "Semantifier bundle")->required();
  auto* text_group = csem_cmd->add_option_group("input");
  text_group->add_option("--text", text);
  text_group->add_option("--text-file", text_file);
  text_group->require_option(1);
  csem_cmd->add_option("--threshold", threshold);
  auto* elbow_cmd = cl_cmd->add_subcommand("elbow", "Inertia curve and knee over a K range");
  elbow_cmd->add_option("--vectors", vectors_path)->required();
  elbow_cmd->add_option("--k-range", k_range, "start:stop:step or a,b,c")->required();
  elbow_cmd->add_option("--seed", seed);
  elbow_cmd->add_option("--max-iter", max_iter);
  elbow_cmd->add_option("--out", out_path);

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "Naive top-n frequency baseline");
  base_cmd->require_subcommand(1);
  std::string top_list = "10,20,30,40,50";
  bool include_test = false;
  auto* beval_cmd = base_cmd->add_subcommand("eval", "Cross-validate the naive baseline");
  beval_cmd->add_option("--corpus", corpus_path)->required();
  beval_cmd->add_option("--top", top_list);
  beval_cmd->add_option("--folds", n_folds);
  beval_cmd->add_option("--seed", seed);
  beval_cmd->add_flag("--include-test", include_test, "Count frequencies over the whole corpus");
  beval_cmd->add_option("--out", out_path);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Cross-validation sweeps");
  eval_cmd->require_subcommand(1);
  std::string method = "cluster", vectorizer = "tfidf", thresholds = "1", layout = "runs";
  size_t threads = 1;
  auto* run_cmd = eval_cmd->add_subcommand("run", "Run a CV grid and emit a result table");
  run_cmd->add_option("--corpus", corpus_path)->required();
  run_cmd->add_option("--method", method)->check(CLI::IsMember({"naive", "cluster"}));
  run_cmd->add_option("--vectorizer", vectorizer, "tfidf or embedding:<file>");
  run_cmd->add_option("--k-range", k_range, "K values, or n values for naive")->required();
  run_cmd->add_option("--thresholds", thresholds);
  run_cmd->add_option("--folds", n_folds);
  run_cmd->add_option("--seed", seed);
  run_cmd->add_option("--max-iter", max_iter);
  run_cmd->add_option("--threads", threads);
  run_cmd->add_flag("--include-test", include_test);
  run_cmd->add_option("--layout", layout)->check(CLI::IsMember({"runs", "table1", "table2"}));
  run_cmd->add_option("--out", out_path);

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert depositor documents to corpus records");
  std::string source, profile_path, in_path, report_path;
  auto* src_group = ingest_cmd->add_option_group("profile");
  src_group->add_option("--source", source, "Built-in profile name");
  src_group->add_option("--profile", profile_path, "Profile JSON file");
  src_group->require_option(1);
  ingest_cmd->add_option("--in", in_path)->required();
  ingest_cmd->add_option("--out", out_path)->required();
  ingest_cmd->add_option("--report", report_path);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  ServiceConfig config = ServiceConfig::FromEnv();
  serve_cmd->add_option("--model", config.model_path);
  serve_cmd->add_option("--store", config.store_path);
  serve_cmd->add_option("--addr", config.addr);
  serve_cmd->add_option("--pubmed", config.pubmed, "off, fixture:<dir> or live");
  serve_cmd->add_option("--ui", config.ui_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats_cmd->parsed()) {
      Corpus corpus = LoadCorpus(corpus_path);
      PrintLoadReport(corpus);
      std::cout << StatsToJson(ComputeCorpusStats(corpus)).dump(2) << "\n";
    } else if (validate_cmd->parsed()) {
      Corpus corpus = LoadCorpus(corpus_path);
      PrintLoadReport(corpus);
      return corpus.load_report().issues.empty() ? 0 : 1;
    } else if (convert_cmd->parsed()) {
      ConvertResult r = ConvertAnnotatedDirectory(text_dir, annotations_path);
      SaveCorpus(out_path, r.records);
      std::cerr << r.records.size() << " records written";
      if (!r.missing_text.empty()) std::cerr << ", " << r.missing_text.size() << " without text";
      if (!r.bad_rows.empty()) std::cerr << ", " << r.bad_rows.size() << " bad annotation rows";
      std::cerr << "\n";
    } else if (folds_cmd->parsed()) {
      Corpus corpus = LoadCorpus(corpus_path);
      nlohmann::json out = nlohmann::json::array();
      for (const auto& f : MakeFolds(corpus, n_folds, seed)) out.push_back(FoldToJson(f));
      std::cout << out.dump(2) << "\n";
    } else if (vfit_cmd->parsed()) {
      Corpus corpus = LoadCorpus(corpus_path);
      std::vector<std::string> texts;
      for (const auto& r : corpus.records()) texts.push_back(r.text);
      VectorizerModel model = VectorizerModel::FitTfidf(texts);
      model.Save(out_path);
      std::cerr << "vocabulary " << model.dimension() << " terms, fingerprint "
                << model.Fingerprint() << "\n";
    } else if (vtrans_cmd->parsed()) {
      VectorizerModel model = embeddings_flag
                                  ? VectorizerModel::LoadEmbeddings(model_path)
                                  : VectorizerModel::Load(model_path);
      Corpus corpus = LoadCorpus(corpus_path);
      std::vector<IdentifiedVector> rows;
      for (const auto& r : corpus.records()) rows.push_back({r.id, model.Transform(r)});
      auto out = OpenOut(out_path);
      WriteVectors(out, rows, dense);
    } else if (cfit_cmd->parsed()) {
      auto rows = LoadVectors(vectors_path);
      std::vector<AssayVector> vectors;
      std::vector<std::string> ids;
      for (auto& r : rows) {
        ids.push_back(r.id);
        vectors.push_back(std::move(r.vector));
      }
      ClusterModel model = FitKMeans(vectors, ids, {k, seed, max_iter, tol});
      std::cerr << "k=" << model.k << " inertia=" << model.inertia
                << " iterations=" << model.iterations
                << (model.converged ? " converged" : " max_iter reached") << "\n";
      if (!corpus_path.empty()) {
        Corpus corpus = LoadCorpus(corpus_path);
        model = AttachStatements(std::move(model), corpus.Select(ids));
      }
      if (!vectorizer_path.empty()) {
        if (corpus_path.empty()) {
          throw Error(ErrorCode::kInvalidArgument, "--vectorizer needs --corpus for statements");
        }
        Semantifier s;
        s.vectorizer = VectorizerModel::Load(vectorizer_path);
        model.vectorizer_fingerprint = s.vectorizer.Fingerprint();
        s.clusters = std::move(model);
        s.Save(out_path);
      } else {
        SaveClusterModel(model, out_path);
      }
    } else if (csem_cmd->parsed()) {
      Semantifier s = Semantifier::Load(model_path);
      if (!text_file.empty()) text = ReadFile(text_file);
      std::cout << s.SemantifyText(text, threshold).ToJson().dump(2) << "\n";
    } else if (elbow_cmd->parsed()) {
      auto rows = LoadVectors(vectors_path);
      std::vector<AssayVector> vectors;
      for (auto& r : rows) vectors.push_back(std::move(r.vector));
      auto ks = ParseSizes(k_range);
      ElbowResult result = ElbowSelect(vectors, ks, seed, max_iter);
      std::ostringstream csv;
      csv << "k,inertia,degenerate\n";
      for (const auto& p : result.curve) {
        csv << p.k << "," << p.inertia << "," << (p.degenerate ? 1 : 0) << "\n";
      }
      WriteText(out_path, csv.str());
      std::cerr << "selected k=" << result.selected_k << "\n";
    } else if (beval_cmd->parsed() || run_cmd->parsed()) {
      Corpus corpus = LoadCorpus(corpus_path);
      PrintLoadReport(corpus);
      auto folds = MakeFolds(corpus, n_folds, seed);
      GridSpec spec;
      spec.seed = seed;
      spec.include_test = include_test;
      spec.max_iter = max_iter;
      spec.threads = threads;
      GridLayout grid_layout = GridLayout::kRuns;
      if (beval_cmd->parsed()) {
        spec.method = Method::kNaive;
        spec.top_ns = ParseSizes(top_list);
        grid_layout = GridLayout::kTable1;
      } else {
        spec.method = method == "naive" ? Method::kNaive : Method::kCluster;
        if (spec.method == Method::kNaive) {
          spec.top_ns = ParseSizes(k_range);
        } else {
          spec.vectorizer = ParseVectorizer(vectorizer);
          spec.ks = ParseSizes(k_range);
          spec.thresholds.clear();
          for (size_t t : ParseSizes(thresholds)) spec.thresholds.push_back(static_cast<uint32_t>(t));
        }
        if (layout == "table1") grid_layout = GridLayout::kTable1;
        if (layout == "table2") grid_layout = GridLayout::kTable2;
      }
      auto reports = RunGrid(corpus, folds, spec);
      WriteText(out_path, EmitResultGrid(reports, grid_layout));
    } else if (ingest_cmd->parsed()) {
      SourceProfile profile =
          profile_path.empty() ? SourceProfile::Builtin(source) : SourceProfile::Load(profile_path);
      IngestResult result = ToBioassayRecords(ParseDepositorFile(in_path, profile), profile);
      SaveCorpus(out_path, result.records);
      if (!report_path.empty()) WriteText(report_path, result.report.ToJson().dump(2) + "\n");
      std::cerr << result.report.extracted << "/" << result.report.total << " records extracted, "
                << result.report.unparseable.size() << " unparseable\n";
    } else if (serve_cmd->parsed()) {
      auto store = std::make_shared<GraphStore>(config.store_path);
      std::shared_ptr<const Semantifier> model;
      if (!config.model_path.empty()) {
        model = std::make_shared<const Semantifier>(Semantifier::Load(config.model_path));
      }
      Service service(store, model, MakePubMedClient(config.pubmed));
      std::cerr << "listening on " << config.addr << (model ? "" : " (no model loaded)") << "\n";
      Serve(service, config.addr, config.ui_dir);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
