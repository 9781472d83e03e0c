// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include <fstream>
#include <functional>
#include <optional>

#include "assaysem/error.h"
#include "assaysem/fetch.h"
#include "assaysem/ingest.h"
#include "doctest.h"
#include "testing.h"

using namespace assaysem;

namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an assaysem::Error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("scripps fixture extraction") {
  SourceProfile profile = SourceProfile::Builtin("scripps");
  DepositorParse parsed = ParseDepositorFile(testing::FixturePath("scripps_small.json"), profile);
  CHECK(parsed.total == 3);
  REQUIRE(parsed.records.size() == 3);
  CHECK(parsed.records[0].assay_id == "1001");
  CHECK(parsed.records[0].source == "The Scripps Research Institute Molecular Screening Center");
  CHECK(parsed.records[0].article_refs == std::vector<std::string>{"pmid:20000001", "pmid:20000002"});
  CHECK(parsed.records[1].article_refs == std::vector<std::string>{"pmid:20000002"});

  IngestResult result = ToBioassayRecords(parsed, profile);
  REQUIRE(result.records.size() == 2);
  CHECK(result.records[0].text ==
        "The purpose of this assay is to identify inhibitors of firefly luciferase.\n"
        "Compounds are screened in a 1536-well format using a luminescence readout.\n\n"
        "Cells were dispensed in 1536-well plates and incubated with test compounds.\n"
        "Luminescence was read on a ViewLux plate reader.");
  CHECK(result.records[1].text ==
        "Fluorescence polarization assay measuring binding to a kinase.\n"
        "Summary counterscreen for the primary campaign.\n\n"
        "Enzyme and tracer were mixed with compounds and read after 30 minutes.");
  CHECK(result.records[0].statements.empty());
  CHECK(result.report.total == 3);
  CHECK(result.report.extracted == 2);
  REQUIRE(result.report.unparseable.size() == 1);
  CHECK(result.report.unparseable[0].assay_id == "1003");
  CHECK(result.report.unparseable[0].reason == reason::kNoText);
  CHECK(result.report.ToJson()["unparseable"][0]["id"] == "1003");
}

TEST_CASE("shipped profile file equals the built-in profile") {
  SourceProfile file = SourceProfile::Load(std::filesystem::path(ASSAYSEM_SOURCE_DIR) / "profiles/scripps.json");
  SourceProfile builtin = SourceProfile::Builtin("scripps");
  CHECK(file.name == builtin.name);
  CHECK(file.records_pointer == builtin.records_pointer);
  CHECK(file.id_pointer == builtin.id_pointer);
  REQUIRE(file.sections.size() == builtin.sections.size());
  for (size_t i = 0; i < file.sections.size(); ++i) {
    CHECK(file.sections[i].pointers == builtin.sections[i].pointers);
    CHECK(file.sections[i].heading == builtin.sections[i].heading);
  }
  CHECK(file.refs_prefix == builtin.refs_prefix);
}

TEST_CASE("ingest conservation on a generated 1,600 entry document") {
  auto fixture = testing::ScrippsLikeDocument(1600, 182);
  REQUIRE(fixture.textless_ids.size() == 182);
  SourceProfile profile = SourceProfile::Builtin("scripps");
  IngestResult r = ToBioassayRecords(ParseDepositorDocument(fixture.document.dump(), profile), profile);
  CHECK(r.records.size() == 1418);
  CHECK(r.report.total == 1600);
  std::set<std::string> reported;
  for (const auto& u : r.report.unparseable) reported.insert(u.assay_id);
  CHECK(reported == fixture.textless_ids);
  CHECK(r.records.size() + r.report.unparseable.size() == r.report.total);
}

TEST_CASE("duplicate and id-less entries are reported") {
  auto entry = [](std::optional<int> id, const std::string& text) {
    nlohmann::json descr = nlohmann::json::object();
    if (id) descr["aid"]["id"] = *id;
    descr["description"] = nlohmann::json::array({"Assay Overview:", text});
    nlohmann::json e;
    e["assay"]["descr"] = descr;
    return e;
  };
  nlohmann::json doc;
  doc["PC_AssayContainer"] = nlohmann::json::array({entry(1, "x"), entry(1, "y"), entry(std::nullopt, "z")});
  SourceProfile profile = SourceProfile::Builtin("scripps");
  IngestResult r = ToBioassayRecords(ParseDepositorDocument(doc.dump(), profile), profile);
  CHECK(r.records.size() == 1);
  CHECK(r.records[0].text == "x");
  CHECK(r.report.total == 3);
  REQUIRE(r.report.unparseable.size() == 2);
  CHECK(r.report.unparseable[0].assay_id == "#2");
  CHECK(r.report.unparseable[0].reason == reason::kMissingId);
  CHECK(r.report.unparseable[1].reason == reason::kDuplicateId);
}

TEST_CASE("ingest errors") {
  SourceProfile profile = SourceProfile::Builtin("scripps");
  CHECK(CodeOf([&] { ParseDepositorDocument("{\"PC_AssayContainer\": [", profile); }) ==
        ErrorCode::kParse);
  CHECK(CodeOf([&] { ParseDepositorDocument("{\"PC_AssayContainer\": {}}", profile); }) ==
        ErrorCode::kFormat);
  CHECK(CodeOf([] { SourceProfile::Builtin("nonesuch"); }) == ErrorCode::kUnsupportedSource);
  nlohmann::json xml_profile = {{"name", "x"}, {"format", "xml"}, {"id", "/id"}, {"sections", nlohmann::json::array()}};
  CHECK(CodeOf([&] { SourceProfile::FromJson(xml_profile); }) == ErrorCode::kUnsupportedSource);
  nlohmann::json bad_pointer = {{"name", "x"}, {"id", "no-slash"}, {"sections", {{{"name", "a"}, {"pointer", "/a"}}}}};
  CHECK(CodeOf([&] { SourceProfile::FromJson(bad_pointer); }) == ErrorCode::kFormat);
}

TEST_CASE("custom profile with a root array and whole-value sections") {
  nlohmann::json profile_json = {{"name", "custom"},
                                 {"id", "/accession"},
                                 {"sections", {{{"name", "body"}, {"pointer", "/summary"}}}}};
  SourceProfile profile = SourceProfile::FromJson(profile_json);
  nlohmann::json doc = {{{"accession", "X1"}, {"summary", "Full text\nsecond line"}},
                        {{"accession", "X2"}}};
  IngestResult r = ToBioassayRecords(ParseDepositorDocument(doc.dump(), profile), profile);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].text == "Full text\nsecond line");
  CHECK(r.records[0].id == "X1");
}

TEST_CASE("pubmed and pubchem clients against fixtures") {
  auto fetcher = std::make_shared<FixtureFetcher>(testing::FixturePath("pubmed"));
  PubMedClient pubmed(fetcher);
  auto a = pubmed.Fetch("20000001");
  REQUIRE(a.has_value());
  CHECK(a->external_id == "pmid:20000001");
  CHECK(a->title == "A luminescence screen for luciferase inhibitors.");
  CHECK(a->authors == std::vector<std::string>{"Doe J", "Roe R"});
  CHECK(a->year == "2010");
  CHECK_FALSE(pubmed.Fetch("29999999").has_value());
  CHECK_FALSE(pubmed.Fetch("11111111").has_value());
  CHECK(fetcher->requests().size() == 3);

  CHECK(IsWellFormedExternalId("pmid:123"));
  CHECK(IsWellFormedExternalId("doi:10.1000/xyz.1"));
  CHECK_FALSE(IsWellFormedExternalId("pmid:12a"));
  CHECK_FALSE(IsWellFormedExternalId("doi:11.1/x"));
  CHECK_FALSE(IsWellFormedExternalId("12345"));

  testing::ScratchDir dir;
  const std::string list_url = PubChemClient::SourceAidsUrl("The Scripps Research Institute Molecular Screening Center");
  const std::string d1 = PubChemClient::DescriptionUrl("1001");
  nlohmann::json index = {{list_url, "aids.json"}, {d1, "d1.json"}};
  std::ofstream(dir / "index.json") << index.dump();
  std::ofstream(dir / "aids.json") << R"({"IdentifierList": {"AID": [1001]}})";
  nlohmann::json small;
  std::ifstream(testing::FixturePath("scripps_small.json")) >> small;
  nlohmann::json one = {{"PC_AssayContainer", {small["PC_AssayContainer"][0]}}};
  std::ofstream(dir / "d1.json") << one.dump();
  PubChemClient pubchem(std::make_shared<FixtureFetcher>(dir.path()));
  auto aids = pubchem.ListAssayIds("The Scripps Research Institute Molecular Screening Center");
  CHECK(aids == std::vector<std::string>{"1001"});
  auto doc = pubchem.FetchDescriptions(aids);
  SourceProfile profile = SourceProfile::Builtin("scripps");
  auto parsed = ParseDepositorDocument(doc.dump(), profile);
  CHECK(parsed.records.size() == 1);
  CHECK(list_url.find("sourceall/The%20Scripps") != std::string::npos);
}
