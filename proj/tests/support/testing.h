// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

// Shared test helpers: fixture paths, scratch directories, synthetic data
// generators and independent oracles.

#ifndef ASSAYSEM_TESTS_SUPPORT_TESTING_H_
#define ASSAYSEM_TESTS_SUPPORT_TESTING_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "assaysem/corpus.h"
#include "assaysem/evaluate.h"
#include "assaysem/vectorize.h"
#include "json.hpp"

namespace assaysem::testing {

#ifndef ASSAYSEM_FIXTURE_DIR
#error "ASSAYSEM_FIXTURE_DIR must be defined by the build"
#endif

inline std::filesystem::path FixturePath(const std::string& name) {
  return std::filesystem::path(ASSAYSEM_FIXTURE_DIR) / name;
}

// Removed on destruction.
class ScratchDir {
 public:
  ScratchDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("assaysem-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Topic-structured labeled corpus. Each topic owns a private word list and a
// core statement set; members draw extra statements from a topic pool so
// clusters have graded statement frequencies.
struct SyntheticSpec {
  size_t records = 90;
  size_t topics = 3;
  size_t words_per_topic = 8;
  size_t tokens_per_record = 20;
  size_t core_statements = 3;
  size_t pool_statements = 4;
  double pool_rate = 0.4;
  double noise_rate = 0.25;
  uint64_t seed = 1;
};

inline std::vector<BioassayRecord> SyntheticRecords(const SyntheticSpec& spec) {
  std::mt19937_64 gen(spec.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> noise = {"assay", "compound", "plate", "screen",
                                          "measured", "well", "buffer", "data"};
  std::vector<BioassayRecord> out;
  for (size_t i = 0; i < spec.records; ++i) {
    const size_t t = i % spec.topics;
    BioassayRecord r;
    char id[32];
    std::snprintf(id, sizeof(id), "A%05zu", i);
    r.id = id;
    for (size_t w = 0; w < spec.tokens_per_record; ++w) {
      if (u(gen) < spec.noise_rate) {
        r.text += noise[gen() % noise.size()];
      } else {
        r.text += "topic" + std::to_string(t) + "w" + std::to_string(gen() % spec.words_per_topic);
      }
      r.text += ' ';
    }
    for (size_t c = 0; c < spec.core_statements; ++c) {
      r.statements.emplace("core property " + std::to_string(c), "topic " + std::to_string(t));
    }
    for (size_t p = 0; p < spec.pool_statements; ++p) {
      if (u(gen) < spec.pool_rate) {
        r.statements.emplace("pool property " + std::to_string(p),
                             "topic " + std::to_string(t) + " option");
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// Isotropic Gaussian blobs in `dim` dimensions with centers far apart.
inline std::vector<AssayVector> Blobs(size_t blobs, size_t per_blob, size_t dim, double spread,
                                      uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, spread);
  std::vector<AssayVector> out;
  for (size_t b = 0; b < blobs; ++b) {
    for (size_t i = 0; i < per_blob; ++i) {
      std::vector<double> x(dim);
      for (size_t d = 0; d < dim; ++d) x[d] = noise(gen) + (d == b % dim ? 10.0 * (1 + b / dim) : 0.0);
      out.push_back(AssayVector::FromDense(x));
    }
  }
  return out;
}

// Micro counts by explicit enumeration of every statement in either set.
struct OracleCounts {
  uint64_t tp = 0, fp = 0, fn = 0;
};

inline OracleCounts OracleMicroCounts(const std::vector<PredictionPair>& pairs) {
  OracleCounts c;
  for (const auto& p : pairs) {
    std::set<std::pair<std::string, std::string>> pred, gold;
    for (const auto& s : p.predicted) pred.emplace(s.property(), s.value());
    for (const auto& s : p.gold) gold.emplace(s.property(), s.value());
    std::set<std::pair<std::string, std::string>> all = pred;
    all.insert(gold.begin(), gold.end());
    for (const auto& s : all) {
      bool in_p = pred.count(s) > 0, in_g = gold.count(s) > 0;
      if (in_p && in_g) ++c.tp;
      if (in_p && !in_g) ++c.fp;
      if (!in_p && in_g) ++c.fn;
    }
  }
  return c;
}

// A depositor document in the built-in Scripps profile layout with
// `textless` entries spread evenly that carry no overview or protocol text.
struct DepositorFixture {
  nlohmann::json document;
  std::set<std::string> textless_ids;
};

inline DepositorFixture ScrippsLikeDocument(size_t total, size_t textless) {
  DepositorFixture f;
  nlohmann::json entries = nlohmann::json::array();
  for (size_t i = 0; i < total; ++i) {
    const std::string aid = std::to_string(500000 + i);
    const bool no_text = (i * textless) / total != ((i + 1) * textless) / total;
    nlohmann::json descr = {
        {"aid", {{"id", 500000 + i}, {"version", 1}}},
        {"aid_source", {{"db", {{"name", "The Scripps Research Institute Molecular Screening Center"}}}}},
        {"name", "Assay " + aid}};
    if (no_text) {
      f.textless_ids.insert(aid);
      descr["description"] = {"Data deposited without a structured description."};
    } else {
      descr["description"] = {"Assay Overview:", "Screen " + aid + " for inhibitors.", "",
                              "Protocol Summary:", "Compounds were dispensed and read.", "",
                              "References:", "none"};
      descr["xref"] = {{{"xref", {{"pmid", 30000000 + i / 3}}}}};
    }
    entries.push_back({{"assay", {{"descr", descr}}}});
  }
  f.document = {{"PC_AssayContainer", entries}};
  return f;
}

inline bool Near(double a, double b, double eps = 1e-12) { return std::fabs(a - b) <= eps; }

}  // namespace assaysem::testing

#endif  // ASSAYSEM_TESTS_SUPPORT_TESTING_H_
