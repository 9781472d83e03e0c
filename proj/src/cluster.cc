// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/cluster.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "assaysem/error.h"
#include "assaysem/random.h"

namespace assaysem {

namespace {

double SquaredNorm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// ||x - c||^2 via the expansion; clamped at zero against cancellation.
double SquaredDistance(const AssayVector& x, std::span<const double> c,
                       double c_norm2) {
  double d = x.norm() * x.norm() - 2.0 * x.Dot(c) + c_norm2;
  return d > 0.0 ? d : 0.0;
}

struct Assignment {
  std::vector<uint32_t> labels;
  std::vector<double> d2;
  double inertia = 0.0;
};

Assignment AssignAll(std::span<const AssayVector> vectors,
                     const std::vector<std::vector<double>>& centroids) {
  std::vector<double> norms(centroids.size());
  for (size_t c = 0; c < centroids.size(); ++c) norms[c] = SquaredNorm(centroids[c]);
  Assignment a;
  a.labels.resize(vectors.size());
  a.d2.resize(vectors.size());
  for (size_t i = 0; i < vectors.size(); ++i) {
    uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < centroids.size(); ++c) {
      double d = SquaredDistance(vectors[i], centroids[c], norms[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<uint32_t>(c);
      }
    }
    a.labels[i] = best;
    a.d2[i] = best_d;
    a.inertia += best_d;
  }
  return a;
}

std::vector<std::vector<double>> SeedPlusPlus(std::span<const AssayVector> vectors,
                                              size_t k, Rng& rng) {
  const size_t n = vectors.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(vectors[rng.UniformIndex(n)].ToDense());
  std::vector<double> min_d2(n);
  double norm0 = SquaredNorm(centroids[0]);
  for (size_t i = 0; i < n; ++i) min_d2[i] = SquaredDistance(vectors[i], centroids[0], norm0);
  for (size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : min_d2) total += d;
    size_t pick = n - 1;
    if (total > 0.0) {
      double r = rng.UniformDouble() * total;
      double cum = 0.0;
      for (size_t i = 0; i < n; ++i) {
        if (min_d2[i] <= 0.0) continue;
        cum += min_d2[i];
        if (cum > r) {
          pick = i;
          break;
        }
      }
      // Rounding can leave r above the final partial sum.
      if (min_d2[pick] <= 0.0) {
        for (size_t i = n; i-- > 0;) {
          if (min_d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = rng.UniformIndex(n);
    }
    centroids.push_back(vectors[pick].ToDense());
    double norm = SquaredNorm(centroids.back());
    for (size_t i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], SquaredDistance(vectors[i], centroids.back(), norm));
    }
  }
  return centroids;
}

nlohmann::json SparseJson(std::span<const double> dense) {
  std::vector<uint32_t> idx;
  std::vector<double> val;
  for (size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      idx.push_back(static_cast<uint32_t>(i));
      val.push_back(dense[i]);
    }
  }
  return {{"indices", idx}, {"values", val}};
}

}  // namespace

std::pair<uint32_t, double> ClusterModel::Nearest(const AssayVector& v) const {
  if (v.dimension() != dimension) {
    throw Error(ErrorCode::kInvalidArgument,
                "vector dimension " + std::to_string(v.dimension()) +
                    " does not match model dimension " + std::to_string(dimension));
  }
  uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < centroids.size(); ++c) {
    double d = SquaredDistance(v, centroids[c], SquaredNorm(centroids[c]));
    if (d < best_d) {
      best_d = d;
      best = static_cast<uint32_t>(c);
    }
  }
  return {best, best_d};
}

ClusterModel FitKMeans(std::span<const AssayVector> vectors,
                       std::span<const std::string> ids, const KMeansOptions& options) {
  const size_t n = vectors.size();
  const size_t k = options.k;
  if (ids.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "ids and vectors differ in length");
  }
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (k >= n) {
    throw Error(ErrorCode::kInvalidArgument,
                "k must be smaller than the number of training vectors (k=" +
                    std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  const size_t dim = vectors[0].dimension();
  for (const auto& v : vectors) {
    if (v.dimension() != dim) {
      throw Error(ErrorCode::kInvalidArgument, "vectors differ in dimension");
    }
  }

  Rng rng(options.seed);
  ClusterModel model;
  model.k = k;
  model.dimension = dim;
  model.seed = options.seed;
  model.max_iter = options.max_iter;
  model.tol = options.tol;
  model.centroids = SeedPlusPlus(vectors, k, rng);

  Assignment current = AssignAll(vectors, model.centroids);
  model.inertia_history.push_back(current.inertia);
  for (size_t iter = 0; iter < options.max_iter; ++iter) {
    ++model.iterations;
    std::vector<std::vector<double>> next(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      uint32_t c = current.labels[i];
      ++counts[c];
      auto idx = vectors[i].indices();
      auto val = vectors[i].values();
      for (size_t e = 0; e < idx.size(); ++e) next[c][idx[e]] += val[e];
    }
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      double inv = 1.0 / static_cast<double>(counts[c]);
      for (double& x : next[c]) x *= inv;
    }
    // Reseed empty clusters at the points farthest from their new centroid.
    std::vector<bool> used(n, false);
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      size_t far = n;
      double far_d = -1.0;
      for (size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        const auto& own = next[current.labels[i]];
        double d = SquaredDistance(vectors[i], own, SquaredNorm(own));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      used[far] = true;
      next[c] = vectors[far].ToDense();
      ++model.repairs;
    }

    double shift2 = 0.0, base2 = 0.0;
    for (size_t c = 0; c < k; ++c) {
      for (size_t d = 0; d < dim; ++d) {
        double delta = next[c][d] - model.centroids[c][d];
        shift2 += delta * delta;
        base2 += model.centroids[c][d] * model.centroids[c][d];
      }
    }
    model.centroids = std::move(next);

    Assignment updated = AssignAll(vectors, model.centroids);
    model.inertia_history.push_back(updated.inertia);
    bool unchanged = updated.labels == current.labels;
    current = std::move(updated);
    double rel = base2 > 0.0 ? std::sqrt(shift2 / base2) : std::sqrt(shift2);
    if (unchanged || rel < options.tol) {
      model.converged = true;
      break;
    }
  }

  model.inertia = current.inertia;
  model.cluster_sizes.assign(k, 0);
  for (size_t i = 0; i < n; ++i) {
    model.assignments[ids[i]] = current.labels[i];
    ++model.cluster_sizes[current.labels[i]];
  }
  if (model.assignments.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate training ids");
  }
  model.empty_clusters = static_cast<size_t>(
      std::count(model.cluster_sizes.begin(), model.cluster_sizes.end(), 0u));
  return model;
}

ClusterModel AttachStatements(ClusterModel model, std::span<const BioassayRecord> train) {
  model.statement_freq.assign(model.k, {});
  for (const auto& record : train) {
    auto it = model.assignments.find(record.id);
    if (it == model.assignments.end()) {
      throw Error(ErrorCode::kConsistency,
                  "training record " + record.id + " has no cluster assignment");
    }
    auto& counts = model.statement_freq[it->second];
    for (const auto& s : record.statements) ++counts[s];
  }
  return model;
}

nlohmann::json SemantificationResult::ToJson() const {
  nlohmann::json statements_json = nlohmann::json::array();
  for (const auto& s : statements) {
    statements_json.push_back({{"property", s.property()}, {"value", s.value()}});
  }
  nlohmann::json j = {{"statements", statements_json},
                      {"threshold", threshold},
                      {"out_of_scope", out_of_scope()}};
  if (cluster_index) {
    j["cluster_index"] = *cluster_index;
    j["distance"] = distance;
  } else {
    j["cluster_index"] = nullptr;
    j["distance"] = nullptr;
  }
  return j;
}

SemantificationResult Semantify(const ClusterModel& model, const AssayVector& v,
                                uint32_t threshold) {
  if (threshold == 0) throw Error(ErrorCode::kInvalidArgument, "threshold must be >= 1");
  if (!model.has_statements()) {
    throw Error(ErrorCode::kInvalidArgument, "cluster model has no attached statements");
  }
  if (v.dimension() != model.dimension) {
    throw Error(ErrorCode::kInvalidArgument,
                "vector dimension " + std::to_string(v.dimension()) +
                    " does not match model dimension " + std::to_string(model.dimension));
  }
  SemantificationResult result;
  result.threshold = threshold;
  if (v.is_zero()) return result;
  auto [cluster, d2] = model.Nearest(v);
  result.cluster_index = cluster;
  result.distance = std::sqrt(d2);
  for (const auto& [statement, count] : model.statement_freq[cluster]) {
    if (count >= threshold) result.statements.push_back(statement);
  }
  return result;
}

size_t KneeIndex(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "knee needs at least three points");
  }
  const size_t m = xs.size();
  double x_span = xs[m - 1] - xs[0];
  auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
  double y_span = *hi - *lo;
  if (x_span == 0.0 || y_span == 0.0) return 0;
  auto nx = [&](size_t i) { return (xs[i] - xs[0]) / x_span; };
  auto ny = [&](size_t i) { return (ys[i] - *lo) / y_span; };
  double x0 = nx(0), y0 = ny(0), x1 = nx(m - 1), y1 = ny(m - 1);
  double len = std::hypot(x1 - x0, y1 - y0);
  size_t best = 0;
  double best_d = -1.0;
  for (size_t i = 0; i < m; ++i) {
    double d = std::abs((x1 - x0) * (y0 - ny(i)) - (x0 - nx(i)) * (y1 - y0)) / len;
    if (d > best_d + 1e-12) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

ElbowResult ElbowSelect(std::span<const AssayVector> vectors,
                        std::span<const size_t> k_candidates, uint64_t seed,
                        size_t max_iter, double tol) {
  if (k_candidates.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "elbow selection needs >= 3 candidates");
  }
  std::vector<std::string> ids(vectors.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = std::to_string(i);
  ElbowResult result;
  std::vector<double> xs, ys;
  for (size_t k : k_candidates) {
    ClusterModel m = FitKMeans(vectors, ids, {k, seed, max_iter, tol});
    result.curve.push_back({k, m.inertia, m.degenerate()});
    xs.push_back(static_cast<double>(k));
    ys.push_back(m.inertia);
  }
  result.selected_k = result.curve[KneeIndex(xs, ys)].k;
  return result;
}

nlohmann::json ClusterModel::ToJson() const {
  nlohmann::json cents = nlohmann::json::array();
  for (const auto& c : centroids) cents.push_back(SparseJson(c));
  nlohmann::json freq = nlohmann::json::array();
  for (const auto& counts : statement_freq) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [s, count] : counts) rows.push_back({s.property(), s.value(), count});
    freq.push_back(std::move(rows));
  }
  return {{"format", "assaysem.cluster/1"},
          {"k", k},
          {"dimension", dimension},
          {"seed", seed},
          {"max_iter", max_iter},
          {"tol", tol},
          {"inertia", inertia},
          {"inertia_history", inertia_history},
          {"iterations", iterations},
          {"converged", converged},
          {"repairs", repairs},
          {"empty_clusters", empty_clusters},
          {"vectorizer_fingerprint", vectorizer_fingerprint},
          {"cluster_sizes", cluster_sizes},
          {"assignments", assignments},
          {"centroids", std::move(cents)},
          {"statement_freq", std::move(freq)}};
}

ClusterModel ClusterModel::FromJson(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "assaysem.cluster/1") {
      throw Error(ErrorCode::kFormat, "not a cluster model");
    }
    ClusterModel m;
    m.k = j.at("k").get<size_t>();
    m.dimension = j.at("dimension").get<size_t>();
    m.seed = j.at("seed").get<uint64_t>();
    m.max_iter = j.at("max_iter").get<size_t>();
    m.tol = j.at("tol").get<double>();
    m.inertia = j.at("inertia").get<double>();
    m.inertia_history = j.at("inertia_history").get<std::vector<double>>();
    m.iterations = j.at("iterations").get<size_t>();
    m.converged = j.at("converged").get<bool>();
    m.repairs = j.at("repairs").get<size_t>();
    m.empty_clusters = j.at("empty_clusters").get<size_t>();
    m.vectorizer_fingerprint = j.at("vectorizer_fingerprint").get<std::string>();
    m.cluster_sizes = j.at("cluster_sizes").get<std::vector<uint32_t>>();
    m.assignments = j.at("assignments").get<std::map<std::string, uint32_t>>();
    for (const auto& c : j.at("centroids")) {
      std::vector<double> dense(m.dimension, 0.0);
      auto idx = c.at("indices").get<std::vector<uint32_t>>();
      auto val = c.at("values").get<std::vector<double>>();
      if (idx.size() != val.size()) throw Error(ErrorCode::kFormat, "bad centroid");
      for (size_t e = 0; e < idx.size(); ++e) {
        if (idx[e] >= m.dimension) throw Error(ErrorCode::kFormat, "centroid index out of range");
        dense[idx[e]] = val[e];
      }
      m.centroids.push_back(std::move(dense));
    }
    for (const auto& rows : j.at("statement_freq")) {
      StatementCounts counts;
      for (const auto& row : rows) {
        counts.emplace(Statement(row.at(0).get<std::string>(), row.at(1).get<std::string>()),
                       row.at(2).get<uint32_t>());
      }
      m.statement_freq.push_back(std::move(counts));
    }
    if (m.centroids.size() != m.k ||
        (!m.statement_freq.empty() && m.statement_freq.size() != m.k)) {
      throw Error(ErrorCode::kFormat, "cluster model shape does not match k");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad cluster model: ") + e.what());
  }
}

SemantificationResult Semantifier::SemantifyText(std::string_view text,
                                                 uint32_t threshold) const {
  return Semantify(clusters, vectorizer.TransformText(text), threshold);
}

SemantificationResult Semantifier::SemantifyRecord(const BioassayRecord& record,
                                                   uint32_t threshold) const {
  return Semantify(clusters, vectorizer.Transform(record), threshold);
}

nlohmann::json Semantifier::ToJson() const {
  return {{"format", "assaysem.semantifier/1"},
          {"vectorizer", vectorizer.ToJson()},
          {"clusters", clusters.ToJson()}};
}

Semantifier Semantifier::FromJson(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "assaysem.semantifier/1") {
    throw Error(ErrorCode::kFormat,
                "not a semantifier bundle (fit clusters with a vectorizer attached)");
  }
  Semantifier s{VectorizerModel::FromJson(j.at("vectorizer")),
                ClusterModel::FromJson(j.at("clusters"))};
  if (!s.clusters.vectorizer_fingerprint.empty() &&
      s.clusters.vectorizer_fingerprint != s.vectorizer.Fingerprint()) {
    throw Error(ErrorCode::kFormat, "cluster model was fitted with a different vectorizer");
  }
  if (s.vectorizer.dimension() != s.clusters.dimension) {
    throw Error(ErrorCode::kFormat, "vectorizer and cluster dimensions differ");
  }
  return s;
}

void Semantifier::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write semantifier: " + path.string());
  out << ToJson().dump() << '\n';
}

Semantifier Semantifier::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read semantifier: " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kFormat, "semantifier is not JSON");
  return FromJson(j);
}

void SaveClusterModel(const ClusterModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write cluster model: " + path.string());
  out << model.ToJson().dump() << '\n';
}

Semantifier FitSemantifier(std::span<const BioassayRecord> train, const KMeansOptions& options) {
  std::vector<std::string> texts, ids;
  texts.reserve(train.size());
  ids.reserve(train.size());
  for (const auto& r : train) {
    texts.push_back(r.text);
    ids.push_back(r.id);
  }
  Semantifier s;
  s.vectorizer = VectorizerModel::FitTfidf(texts);
  std::vector<AssayVector> vectors;
  vectors.reserve(train.size());
  for (const auto& r : train) vectors.push_back(s.vectorizer.Transform(r));
  s.clusters = AttachStatements(FitKMeans(vectors, ids, options), train);
  s.clusters.vectorizer_fingerprint = s.vectorizer.Fingerprint();
  return s;
}

}  // namespace assaysem
