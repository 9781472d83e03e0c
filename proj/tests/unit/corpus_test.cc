// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include <fstream>
#include <set>
#include <sstream>

#include "assaysem/corpus.h"
#include "assaysem/error.h"
#include "doctest.h"
#include "testing.h"

using namespace assaysem;

namespace {

Corpus CorpusOfSize(size_t n) {
  std::vector<BioassayRecord> records;
  for (size_t i = 0; i < n; ++i) records.push_back({"id" + std::to_string(i), "text", {}, {}});
  return Corpus(std::move(records));
}

}  // namespace

TEST_CASE("labels normalize whitespace and ASCII case") {
  CHECK(NormalizeLabel("  Assay   Format\t") == "assay format");
  CHECK(NormalizeLabel("IC50 \n value") == "ic50 value");
  CHECK(NormalizeLabel("") == "");
  CHECK(Statement("Detection Method", " luminescence ") ==
        Statement("detection method", "Luminescence"));
  CHECK_THROWS_AS(Statement("", "x"), Error);
  CHECK_THROWS_AS(Statement("p", "   "), Error);
}

TEST_CASE("corpus parsing collects malformed lines") {
  std::istringstream in(
      R"({"id":"a","text":"t1","statements":[{"property":"P","value":"V"}]})" "\n"
      "not json\n"
      "\n"
      R"({"id":"a","text":"dup","statements":[]})" "\n"
      R"({"id":7,"text":"numeric id","statements":[]})" "\n"
      R"({"text":"no id","statements":[]})" "\n");
  Corpus c = ParseCorpus(in, "mem");
  CHECK(c.size() == 2);
  CHECK(c.load_report().lines == 5);
  CHECK(c.load_report().parsed == 2);
  REQUIRE(c.load_report().issues.size() == 3);
  CHECK(c.load_report().issues[0].line == 2);
  CHECK(c.load_report().issues[1].line == 4);
  CHECK(c.Find("7") != nullptr);
  CHECK(c.Find("a")->statements.begin()->property() == "p");
  CHECK(c.source() == "mem");
}

TEST_CASE("empty or unreadable corpora are errors") {
  std::istringstream empty("garbage\n");
  try {
    ParseCorpus(empty);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyCorpus);
  }
  try {
    LoadCorpus("/nonexistent/corpus.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
  CHECK_THROWS_AS(Corpus({{"x", "", {}, {}}, {"x", "", {}, {}}}), Error);
}

TEST_CASE("records round-trip through JSON Lines") {
  testing::ScratchDir dir;
  std::vector<BioassayRecord> records = {
      {"r1", "some text", {{"p", "v"}, {"q", "w"}}, {"pmid:1"}},
      {"r2", "other \"quoted\" text\n", {}, {}},
  };
  SaveCorpus(dir / "c.jsonl", records);
  Corpus c = LoadCorpus(dir / "c.jsonl");
  REQUIRE(c.size() == 2);
  CHECK(c.records()[0].statements == records[0].statements);
  CHECK(c.records()[0].article_refs == records[0].article_refs);
  CHECK(c.records()[1].text == records[1].text);
  CHECK(ParseCorpusFormat("jsonl") == CorpusFormat::kJsonLines);
  CHECK_FALSE(ParseCorpusFormat("xml").has_value());
}

TEST_CASE("folds of 983 records split 328/328/327") {
  Corpus c = CorpusOfSize(983);
  auto folds = MakeFolds(c, 3, 42);
  REQUIRE(folds.size() == 3);
  CHECK(folds[0].test_ids.size() == 328);
  CHECK(folds[1].test_ids.size() == 328);
  CHECK(folds[2].test_ids.size() == 327);
}

TEST_CASE("fold invariants hold for many sizes and seeds") {
  for (size_t n : {2u, 3u, 10u, 31u, 100u}) {
    for (size_t k : {2u, 3u, 5u}) {
      if (k > n) continue;
      for (uint64_t seed : {0u, 1u, 99u}) {
        Corpus c = CorpusOfSize(n);
        auto folds = MakeFolds(c, k, seed);
        std::multiset<std::string> tested;
        for (const auto& f : folds) {
          CHECK(f.test_ids.size() + f.train_ids.size() == n);
          CHECK(f.test_ids.size() >= n / k);
          CHECK(f.test_ids.size() <= n / k + 1);
          std::set<std::string> train(f.train_ids.begin(), f.train_ids.end());
          for (const auto& id : f.test_ids) CHECK(train.count(id) == 0);
          tested.insert(f.test_ids.begin(), f.test_ids.end());
        }
        CHECK(tested.size() == n);
        CHECK(std::set<std::string>(tested.begin(), tested.end()).size() == n);
        auto again = MakeFolds(c, k, seed);
        for (size_t f = 0; f < k; ++f) CHECK(again[f].test_ids == folds[f].test_ids);
      }
    }
  }
  CHECK_THROWS_AS(MakeFolds(CorpusOfSize(5), 1, 0), Error);
  CHECK_THROWS_AS(MakeFolds(CorpusOfSize(2), 3, 0), Error);
}

TEST_CASE("fold assignment does not depend on file order") {
  std::vector<BioassayRecord> a, b;
  for (int i = 0; i < 20; ++i) a.push_back({"id" + std::to_string(i), "", {}, {}});
  b.assign(a.rbegin(), a.rend());
  auto fa = MakeFolds(Corpus(a), 3, 5);
  auto fb = MakeFolds(Corpus(b), 3, 5);
  for (size_t f = 0; f < 3; ++f) CHECK(fa[f].test_ids == fb[f].test_ids);
}

TEST_CASE("corpus statistics") {
  Corpus c({{"a", "", {{"p1", "v1"}, {"p2", "v2"}}, {}},
            {"b", "", {{"p1", "v1"}, {"p1", "v3"}, {"p3", "v4"}}, {}},
            {"c", "", {}, {}}});
  CorpusStats s = ComputeCorpusStats(c);
  CHECK(s.records == 3);
  CHECK(s.labeled_records == 2);
  CHECK(s.unique_statements == 4);
  CHECK(s.unique_properties == 3);
  CHECK(s.total_statements == 5);
  CHECK(s.min_statements == 0);
  CHECK(s.max_statements == 3);
  CHECK(s.mean_statements == doctest::Approx(5.0 / 3.0));
  CHECK(StatsToJson(s)["unique_properties"] == 3);
}

TEST_CASE("annotated directory conversion") {
  testing::ScratchDir dir;
  std::filesystem::create_directories(dir / "texts");
  std::ofstream(dir / "texts/AID1.txt") << "first assay";
  std::ofstream(dir / "texts/AID2.txt") << "second assay";
  std::ofstream(dir / "ann.tsv") << "# id\tproperty\tvalue\n"
                                    "AID1\tDetection Method\tLuminescence\n"
                                    "AID1\tassay format\tcell-based\n"
                                    "AID2\tdetection method\tabsorbance\n"
                                    "AID3\tdetection method\tabsorbance\n"
                                    "broken row\n"
                                    "AID2\t\tempty property\n";
  ConvertResult r = ConvertAnnotatedDirectory(dir / "texts", dir / "ann.tsv");
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].id == "AID1");
  CHECK(r.records[0].statements.size() == 2);
  CHECK(r.records[0].text == "first assay");
  CHECK(r.missing_text == std::vector<std::string>{"AID3"});
  CHECK(r.bad_rows == std::vector<size_t>{6, 7});
}
