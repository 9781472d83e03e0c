// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include <sstream>

#include "assaysem/baseline.h"
#include "assaysem/error.h"
#include "assaysem/evaluate.h"
#include "doctest.h"
#include "testing.h"

using namespace assaysem;

namespace {

std::vector<std::string> Lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> Split(const std::string& s) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(s);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

EvalReport Report(Method m, const std::string& vec, size_t k, uint32_t t, int fold, double p,
                  double r, double f1) {
  EvalReport rep;
  rep.config = {m, vec, k, t, 0, fold, false};
  rep.metrics.precision = p;
  rep.metrics.recall = r;
  rep.metrics.f1 = f1;
  return rep;
}

}  // namespace

TEST_CASE("micro metrics on a worked example") {
  std::vector<PredictionPair> pairs = {
      {"a", {{"p", "1"}, {"q", "2"}, {"r", "3"}}, {{"p", "1"}, {"q", "2"}, {"s", "4"}}}};
  Metrics m = MicroMetrics(pairs);
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(*m.precision == doctest::Approx(2.0 / 3.0));
  CHECK(*m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("micro metrics pool counts instead of averaging per assay") {
  std::vector<PredictionPair> pairs = {
      {"a", {{"p", "1"}}, {{"p", "1"}}},
      {"b", {{"p", "1"}, {"p", "2"}, {"p", "3"}}, {{"p", "9"}}},
  };
  Metrics m = MicroMetrics(pairs);
  CHECK(*m.precision == doctest::Approx(0.25));
  CHECK(*m.recall == doctest::Approx(0.5));
  CHECK(m.f1 == doctest::Approx(2 * 0.25 * 0.5 / 0.75));
}

TEST_CASE("undefined precision and recall") {
  Metrics none = MetricsFromCounts(0, 0, 5);
  CHECK_FALSE(none.precision.has_value());
  CHECK(*none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  Metrics empty = MetricsFromCounts(0, 0, 0);
  CHECK_FALSE(empty.precision.has_value());
  CHECK_FALSE(empty.recall.has_value());
  CHECK_THROWS_AS(MicroMetrics(std::vector<PredictionPair>{}), Error);
}

TEST_CASE("fold averaging is arithmetic and skips undefined precision") {
  std::vector<EvalReport> folds = {
      Report(Method::kCluster, "tfidf", 5, 1, 0, 0.5, 0.2, 0.3),
      Report(Method::kCluster, "tfidf", 5, 1, 1, 0.7, 0.4, 0.5),
      Report(Method::kCluster, "tfidf", 5, 1, 2, 0.0, 0.6, 0.1),
  };
  folds[2].metrics.precision.reset();
  EvalReport avg = AverageFolds(folds);
  CHECK(avg.config.fold == -1);
  CHECK(*avg.metrics.precision == doctest::Approx(0.6));
  CHECK(*avg.metrics.recall == doctest::Approx(0.4));
  CHECK(avg.metrics.f1 == doctest::Approx(0.3));
  CHECK(avg.metadata["precision_defined_folds"] == 2);
}

TEST_CASE("frequency table ranking and tie-break") {
  std::vector<BioassayRecord> train = {
      {"1", "", {{"b", "x"}, {"a", "y"}, {"c", "z"}}, {}},
      {"2", "", {{"b", "x"}, {"a", "y"}}, {}},
      {"3", "", {{"b", "x"}, {"d", "w"}}, {}},
  };
  FrequencyTable t = BuildFrequencyTable(train);
  REQUIRE(t.ranked.size() == 4);
  CHECK(t.ranked[0] == std::pair<Statement, uint32_t>{{"b", "x"}, 3});
  CHECK(t.ranked[1] == std::pair<Statement, uint32_t>{{"a", "y"}, 2});
  CHECK(t.ranked[2].first == Statement("c", "z"));
  CHECK(t.ranked[3].first == Statement("d", "w"));
  CHECK(NaiveSemantify(t, 2) == StatementSet{{"b", "x"}, {"a", "y"}});
  CHECK(NaiveSemantify(t, 99).size() == 4);
  CHECK(NaiveSemantify(t, 0).empty());
}

TEST_CASE("naive cross-validation matches a hand recount") {
  Corpus corpus(testing::SyntheticRecords({.records = 30, .seed = 9}));
  auto folds = MakeFolds(corpus, 3, 1);
  for (bool include_test : {false, true}) {
    GridSpec spec;
    spec.method = Method::kNaive;
    spec.top_ns = {3, 5};
    spec.include_test = include_test;
    auto reports = RunGrid(corpus, folds, spec);
    REQUIRE(reports.size() == 8);
    for (const auto& rep : reports) {
      if (rep.config.fold < 0) continue;
      const FoldSplit& f = folds[rep.config.fold];
      auto train = corpus.Select(f.train_ids);
      auto table = BuildFrequencyTable(include_test ? corpus.records() : train);
      auto predicted = NaiveSemantify(table, rep.config.k);
      std::vector<PredictionPair> pairs;
      for (const auto& r : corpus.Select(f.test_ids)) pairs.push_back({r.id, predicted, r.statements});
      auto oracle = testing::OracleMicroCounts(pairs);
      CHECK(rep.metrics.tp == oracle.tp);
      CHECK(rep.metrics.fp == oracle.fp);
      CHECK(rep.metrics.fn == oracle.fn);
    }
  }
}

TEST_CASE("cluster grid is ordered and thread count does not change results") {
  Corpus corpus(testing::SyntheticRecords({.records = 60, .seed = 2}));
  auto folds = MakeFolds(corpus, 3, 7);
  GridSpec spec;
  spec.ks = {3, 6};
  spec.thresholds = {1, 2};
  spec.seed = 5;
  auto one = RunGrid(corpus, folds, spec);
  spec.threads = 4;
  auto many = RunGrid(corpus, folds, spec);
  REQUIRE(one.size() == 2 * 2 * 4);
  REQUIRE(many.size() == one.size());
  for (size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].config.k == many[i].config.k);
    CHECK(one[i].config.fold == many[i].config.fold);
    CHECK(one[i].metrics.tp == many[i].metrics.tp);
    CHECK(one[i].metrics.f1 == many[i].metrics.f1);
  }
  CHECK(one[0].config.k == 3);
  CHECK(one[0].config.threshold == 1);
  CHECK(one[3].config.fold == -1);
  CHECK(one[4].config.threshold == 2);
  CHECK(one[8].config.k == 6);
  CHECK(one[0].metadata["vectorizer_kind"] == "tfidf");
}

TEST_CASE("RunCv agrees with the grid") {
  Corpus corpus(testing::SyntheticRecords({.records = 45, .seed = 3}));
  auto folds = MakeFolds(corpus, 3, 0);
  MethodConfig cfg;
  cfg.k = 4;
  cfg.threshold = 2;
  cfg.seed = 8;
  CvResult cv = RunCv(corpus, cfg, folds);
  CHECK(cv.folds.size() == 3);
  GridSpec spec;
  spec.ks = {4};
  spec.thresholds = {2};
  spec.seed = 8;
  auto grid = RunGrid(corpus, folds, spec);
  CHECK(grid.back().metrics.f1 == cv.average.metrics.f1);
}

TEST_CASE("embedding vectorizer uses the supplied vectors") {
  Corpus corpus = LoadCorpus(testing::FixturePath("toy_corpus.jsonl"));
  auto folds = MakeFolds(corpus, 3, 0);
  GridSpec spec;
  spec.vectorizer.kind = VectorizerKind::kExternal;
  spec.vectorizer.embeddings = std::make_shared<const VectorizerModel>(
      VectorizerModel::LoadEmbeddings(testing::FixturePath("toy_embeddings.jsonl")));
  spec.ks = {3};
  spec.thresholds = {1};
  auto reports = RunGrid(corpus, folds, spec);
  CHECK(reports.back().config.vectorizer == "embedding");
  CHECK(reports.back().metrics.f1 > 0.8);

  GridSpec missing = spec;
  missing.vectorizer.embeddings.reset();
  CHECK_THROWS_AS(RunGrid(corpus, folds, missing), Error);
}

TEST_CASE("runs layout") {
  std::vector<EvalReport> reps = {
      Report(Method::kCluster, "tfidf", 50, 2, 0, 0.5, 0.25, 0.3333),
      Report(Method::kCluster, "tfidf", 50, 2, -1, 0.5, 0.25, 0.3333),
      Report(Method::kNaive, "none", 20, 0, -1, 0.6452, 0.1, 0.2),
  };
  reps[0].metrics.precision.reset();
  auto lines = Lines(EmitResultGrid(reps, GridLayout::kRuns));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "method,vectorizer,k,threshold,fold,P,R,F1");
  CHECK(lines[1] == "cluster,tfidf,50,2,0,NA,0.2500,0.3333");
  CHECK(lines[2] == "cluster,tfidf,50,2,avg,0.5000,0.2500,0.3333");
  CHECK(lines[3] == "naive,none,20,,avg,0.6452,0.1000,0.2000");
}

TEST_CASE("table1 layout keeps averaged naive rows") {
  std::vector<EvalReport> reps = {
      Report(Method::kNaive, "none", 30, 0, -1, 0.5085, 0.3, 0.4),
      Report(Method::kNaive, "none", 20, 0, 0, 0.9, 0.9, 0.9),
      Report(Method::kNaive, "none", 20, 0, -1, 0.6452, 0.2, 0.3),
  };
  auto lines = Lines(EmitResultGrid(reps, GridLayout::kTable1));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "n,P,R,F1");
  CHECK(lines[1] == "20,0.6452,0.2000,0.3000");
  CHECK(lines[2] == "30,0.5085,0.3000,0.4000");
}

TEST_CASE("table2 layout with marks, arrows and missing cells") {
  std::vector<EvalReport> reps = {
      Report(Method::kCluster, "tfidf", 50, 1, -1, 0.6, 0.9, 0.70),
      Report(Method::kCluster, "tfidf", 100, 1, -1, 0.7, 0.9, 0.80),
      Report(Method::kCluster, "tfidf", 150, 1, -1, 0.7, 0.8, 0.751),
      Report(Method::kCluster, "tfidf", 150, 1, 0, 0.0, 0.0, 0.99),
      Report(Method::kCluster, "embedding", 100, 4, -1, 0.9, 0.1, 0.18),
  };
  auto lines = Lines(EmitResultGrid(reps, GridLayout::kTable2));
  REQUIRE(lines.size() == 4);
  auto header = Split(lines[0]);
  REQUIRE(header.size() == 1 + 4 * 2 * 4);
  CHECK(header[1] == "freq>=4_tfidf_P");
  CHECK(header[5] == "freq>=4_embedding_P");
  CHECK(header[25] == "freq>=1_tfidf_P");
  CHECK(header[28] == "freq>=1_tfidf_mark");
  CHECK(header[32] == "freq>=1_embedding_mark");

  auto r50 = Split(lines[1]), r100 = Split(lines[2]), r150 = Split(lines[3]);
  REQUIRE(r50.size() == header.size());
  REQUIRE(r100.size() == header.size());
  CHECK(r50[0] == "50");
  CHECK(r50[1] == "MISSING");
  CHECK(r50[25] == "0.6000");
  CHECK(r50[28] == "");
  CHECK(r100[27] == "0.8000");
  CHECK(r100[28] == "*↑");
  CHECK(r150[28] == "↓");
  CHECK(r100[5] == "0.9000");
  CHECK(r100[8] == "*");
  CHECK(r50[5] == "MISSING");

  auto empty = Lines(EmitResultGrid(std::vector<EvalReport>{}, GridLayout::kTable2));
  CHECK(empty.size() == 1);
}
