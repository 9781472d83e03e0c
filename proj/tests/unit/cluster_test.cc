// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include <algorithm>
#include <cmath>
#include <limits>

#include "assaysem/cluster.h"
#include "assaysem/error.h"
#include "doctest.h"
#include "testing.h"

using namespace assaysem;

namespace {

std::vector<std::string> Ids(size_t n) {
  std::vector<std::string> ids;
  for (size_t i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
  return ids;
}

// Minimum within-cluster sum of squares over every labeling with no empty
// cluster, with the optimal centroids.
std::pair<double, std::vector<std::vector<double>>> BruteForceKMeans(
    const std::vector<std::vector<double>>& pts, size_t k) {
  const size_t n = pts.size(), dim = pts[0].size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_c;
  std::vector<size_t> label(n, 0);
  while (true) {
    std::vector<std::vector<double>> c(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> cnt(k, 0);
    for (size_t i = 0; i < n; ++i) {
      ++cnt[label[i]];
      for (size_t d = 0; d < dim; ++d) c[label[i]][d] += pts[i][d];
    }
    if (std::all_of(cnt.begin(), cnt.end(), [](size_t x) { return x > 0; })) {
      for (size_t j = 0; j < k; ++j) {
        for (auto& x : c[j]) x /= static_cast<double>(cnt[j]);
      }
      double sse = 0.0;
      for (size_t i = 0; i < n; ++i) {
        for (size_t d = 0; d < dim; ++d) {
          double t = pts[i][d] - c[label[i]][d];
          sse += t * t;
        }
      }
      if (sse < best) {
        best = sse;
        best_c = c;
      }
    }
    size_t i = 0;
    while (i < n && ++label[i] == k) label[i++] = 0;
    if (i == n) break;
  }
  std::sort(best_c.begin(), best_c.end());
  return {best, best_c};
}

std::vector<AssayVector> ToVectors(const std::vector<std::vector<double>>& pts) {
  std::vector<AssayVector> out;
  for (const auto& p : pts) out.push_back(AssayVector::FromDense(p));
  return out;
}

}  // namespace

TEST_CASE("two-cluster toy problem matches the exhaustive optimum") {
  std::vector<std::vector<double>> pts = {{0, 0}, {0, 1}, {10, 0}, {10, 1}};
  auto [oracle_sse, oracle_c] = BruteForceKMeans(pts, 2);
  CHECK(oracle_sse == doctest::Approx(1.0));
  REQUIRE(oracle_c == std::vector<std::vector<double>>{{0, 0.5}, {10, 0.5}});
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto m = FitKMeans(ToVectors(pts), Ids(4), {2, seed});
    auto c = m.centroids;
    std::sort(c.begin(), c.end());
    CHECK(m.inertia == doctest::Approx(oracle_sse));
    CHECK(c[0][0] == doctest::Approx(0.0));
    CHECK(c[0][1] == doctest::Approx(0.5));
    CHECK(c[1][0] == doctest::Approx(10.0));
    CHECK(c[1][1] == doctest::Approx(0.5));
    CHECK(m.converged);
    CHECK(m.assignments.at("p0") == m.assignments.at("p1"));
    CHECK(m.assignments.at("p0") != m.assignments.at("p2"));
  }
}

TEST_CASE("k-means never beats the exhaustive optimum and finds it on separated data") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0.0, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> pts;
    for (int b = 0; b < 3; ++b) {
      for (int i = 0; i < 3; ++i) pts.push_back({b * 8.0 + nd(gen), (b % 2) * 5.0 + nd(gen)});
    }
    auto [oracle_sse, oracle_c] = BruteForceKMeans(pts, 3);
    auto m = FitKMeans(ToVectors(pts), Ids(pts.size()), {3, static_cast<uint64_t>(trial)});
    CHECK(m.inertia >= oracle_sse - 1e-9);
    CHECK(m.inertia == doctest::Approx(oracle_sse).epsilon(1e-9));
  }
}

TEST_CASE("fit argument validation") {
  auto v = ToVectors({{0.0}, {1.0}, {2.0}});
  CHECK_THROWS_AS(FitKMeans(v, Ids(3), {0, 0}), Error);
  CHECK_THROWS_AS(FitKMeans(v, Ids(3), {3, 0}), Error);
  CHECK_THROWS_AS(FitKMeans(v, Ids(2), {1, 0}), Error);
  std::vector<AssayVector> mixed = {AssayVector::FromDense(std::vector<double>{1.0}),
                                    AssayVector::FromDense(std::vector<double>{1.0, 2.0})};
  CHECK_THROWS_AS(FitKMeans(mixed, Ids(2), {1, 0}), Error);
  const std::vector<std::string> dup = {"a", "a", "b"};
  CHECK_THROWS_AS(FitKMeans(v, dup, {2, 0}), Error);
}

TEST_CASE("duplicate points leave reported empty clusters") {
  auto v = ToVectors({{1.0}, {1.0}, {1.0}, {1.0}});
  auto m = FitKMeans(v, Ids(4), {3, 1});
  CHECK(m.cluster_sizes.size() == 3);
  CHECK(m.inertia == doctest::Approx(0.0));
  CHECK(m.degenerate());
}

TEST_CASE("nearest centroid ties go to the lowest index") {
  ClusterModel m;
  m.k = 2;
  m.dimension = 1;
  m.centroids = {{-1.0}, {1.0}};
  auto [c, d2] = m.Nearest(AssayVector::FromDense(std::vector<double>{0.0}));
  CHECK(c == 0);
  CHECK(d2 == doctest::Approx(1.0));
  CHECK(m.Nearest(AssayVector::FromDense(std::vector<double>{0.5})).first == 1);
  CHECK_THROWS_AS(m.Nearest(AssayVector::FromDense(std::vector<double>{0.0, 0.0})), Error);
}

TEST_CASE("semantify applies the frequency threshold") {
  std::vector<std::vector<double>> pts = {{0, 0}, {0, 1}, {0, 2}, {10, 0}, {10, 1}};
  auto m = FitKMeans(ToVectors(pts), Ids(5), {2, 7});
  std::vector<BioassayRecord> train = {
      {"p0", "", {{"format", "cell"}, {"detection", "lum"}}, {}},
      {"p1", "", {{"format", "cell"}, {"detection", "fluor"}}, {}},
      {"p2", "", {{"format", "cell"}, {"detection", "lum"}}, {}},
      {"p3", "", {{"format", "biochem"}}, {}},
      {"p4", "", {{"format", "biochem"}, {"organism", "ecoli"}}, {}},
  };
  m = AttachStatements(m, train);
  auto at = [&](double x, double y, uint32_t t) {
    return Semantify(m, AssayVector::FromDense(std::vector<double>{x, y}), t);
  };
  auto r1 = at(0, 1, 1);
  CHECK(r1.statements.size() == 3);
  auto r2 = at(0, 1, 2);
  CHECK(r2.statements == std::vector<Statement>{{"detection", "lum"}, {"format", "cell"}});
  auto r3 = at(0, 1, 3);
  CHECK(r3.statements == std::vector<Statement>{{"format", "cell"}});
  CHECK(at(0, 1, 4).statements.empty());
  CHECK_FALSE(at(0, 1, 4).out_of_scope());
  CHECK(at(10, 0.5, 2).statements == std::vector<Statement>{{"format", "biochem"}});

  auto zero = Semantify(m, AssayVector::FromSparse(2, {}), 1);
  CHECK(zero.out_of_scope());
  CHECK(zero.statements.empty());
  CHECK(zero.ToJson()["cluster_index"].is_null());

  CHECK_THROWS_AS(at(0, 0, 0), Error);
  ClusterModel bare = FitKMeans(ToVectors(pts), Ids(5), {2, 7});
  CHECK_THROWS_AS(Semantify(bare, AssayVector::FromDense(std::vector<double>{0, 0}), 1), Error);
  std::vector<BioassayRecord> stranger = {{"nobody", "", {}, {}}};
  try {
    AttachStatements(bare, stranger);
    FAIL("expected kConsistency");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConsistency);
  }
}

TEST_CASE("knee of a piecewise-linear curve") {
  std::vector<double> xs = {1, 2, 3, 4, 5, 6};
  std::vector<double> ys = {100, 40, 10, 8, 6, 4};
  CHECK(KneeIndex(xs, ys) == 2);
  std::vector<double> line = {5, 4, 3, 2, 1, 0};
  CHECK(KneeIndex(xs, line) == 0);
  CHECK_THROWS_AS(KneeIndex(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
}

TEST_CASE("cluster model and semantifier bundles round-trip") {
  testing::ScratchDir dir;
  auto records = testing::SyntheticRecords({.records = 30, .seed = 4});
  std::vector<std::string> texts, ids;
  for (const auto& r : records) {
    texts.push_back(r.text);
    ids.push_back(r.id);
  }
  Semantifier s;
  s.vectorizer = VectorizerModel::FitTfidf(texts);
  std::vector<AssayVector> vectors;
  for (const auto& r : records) vectors.push_back(s.vectorizer.Transform(r));
  s.clusters = AttachStatements(FitKMeans(vectors, ids, {3, 11}), records);
  s.clusters.vectorizer_fingerprint = s.vectorizer.Fingerprint();

  auto cm = ClusterModel::FromJson(s.clusters.ToJson());
  CHECK(cm.assignments == s.clusters.assignments);
  CHECK(cm.statement_freq == s.clusters.statement_freq);
  CHECK(cm.inertia_history == s.clusters.inertia_history);
  for (size_t c = 0; c < cm.k; ++c) {
    for (size_t d = 0; d < cm.dimension; ++d) {
      CHECK(cm.centroids[c][d] == s.clusters.centroids[c][d]);
    }
  }

  s.Save(dir / "bundle.json");
  Semantifier back = Semantifier::Load(dir / "bundle.json");
  for (const auto& r : records) {
    CHECK(back.SemantifyText(r.text, 2).statements == s.SemantifyText(r.text, 2).statements);
  }
  CHECK(back.SemantifyRecord(records[0], 1).cluster_index ==
        s.SemantifyRecord(records[0], 1).cluster_index);

  auto j = s.ToJson();
  j["clusters"]["vectorizer_fingerprint"] = "0000";
  CHECK_THROWS_AS(Semantifier::FromJson(j), Error);
  SaveClusterModel(s.clusters, dir / "bare.json");
  CHECK_THROWS_AS(Semantifier::Load(dir / "bare.json"), Error);
}
