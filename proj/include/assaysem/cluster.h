// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

// K-means over assay vectors, per-cluster statement aggregation, and
// nearest-cluster semantification.

#ifndef ASSAYSEM_CLUSTER_H_
#define ASSAYSEM_CLUSTER_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "assaysem/corpus.h"
#include "assaysem/vectorize.h"
#include "json.hpp"

namespace assaysem {

struct KMeansOptions {
  size_t k = 0;
  uint64_t seed = 0;
  size_t max_iter = 300;
  // Relative centroid shift: ||C_t+1 - C_t||_F / ||C_t||_F.
  double tol = 1e-6;
};

using StatementCounts = std::map<Statement, uint32_t>;

struct ClusterModel {
  size_t k = 0;
  size_t dimension = 0;
  std::vector<std::vector<double>> centroids;
  std::map<std::string, uint32_t> assignments;  // training id -> cluster
  std::vector<uint32_t> cluster_sizes;
  // Distinct-assay statement counts per cluster; empty until attached.
  std::vector<StatementCounts> statement_freq;
  uint64_t seed = 0;
  size_t max_iter = 0;
  double tol = 0.0;
  double inertia = 0.0;
  // Inertia after every assignment step, ending with the final assignment.
  std::vector<double> inertia_history;
  size_t iterations = 0;
  bool converged = false;
  // Number of times an empty cluster was reseeded during the fit.
  size_t repairs = 0;
  // Clusters still without members after the final assignment. Only
  // possible when the data has fewer distinct points than k.
  size_t empty_clusters = 0;
  std::string vectorizer_fingerprint;

  bool has_statements() const { return statement_freq.size() == k && k > 0; }
  bool degenerate() const { return empty_clusters > 0; }

  // Nearest centroid and its squared distance. Ties go to the lowest index.
  std::pair<uint32_t, double> Nearest(const AssayVector& v) const;

  nlohmann::json ToJson() const;
  static ClusterModel FromJson(const nlohmann::json& j);
};

// Lloyd's algorithm from k-means++ seeding. Each empty cluster found after
// an update step is reseeded at the point farthest from its own centroid.
// Throws Error(kInvalidArgument) unless 1 <= k < n and all vectors share one
// dimension; `ids` must parallel `vectors`.
ClusterModel FitKMeans(std::span<const AssayVector> vectors,
                       std::span<const std::string> ids,
                       const KMeansOptions& options);

// Counts, per cluster, the member assays carrying each statement. Throws
// Error(kConsistency) if a record has no assignment.
ClusterModel AttachStatements(ClusterModel model,
                              std::span<const BioassayRecord> train);

struct SemantificationResult {
  // Unset when the input is out of scope (a zero vector: nothing in the
  // text matched the training vocabulary).
  std::optional<uint32_t> cluster_index;
  double distance = 0.0;
  std::vector<Statement> statements;  // sorted
  uint32_t threshold = 1;

  bool out_of_scope() const { return !cluster_index.has_value(); }
  nlohmann::json ToJson() const;
};

// Statements of the nearest cluster occurring in at least `threshold` member
// assays. Throws Error(kInvalidArgument) on dimension mismatch, threshold 0,
// or a model without attached statements.
SemantificationResult Semantify(const ClusterModel& model, const AssayVector& v,
                                uint32_t threshold);

struct ElbowPoint {
  size_t k = 0;
  double inertia = 0.0;
  bool degenerate = false;
};

struct ElbowResult {
  size_t selected_k = 0;
  std::vector<ElbowPoint> curve;
};

// Knee of a curve: the point with maximum perpendicular distance from the
// chord between its endpoints, after scaling both axes to [0, 1]. Requires
// at least three points; ties go to the smaller index.
size_t KneeIndex(std::span<const double> xs, std::span<const double> ys);

// Fits each candidate with the same seed and picks the knee of the
// inertia curve. Throws Error(kInvalidArgument) for fewer than three
// candidates.
ElbowResult ElbowSelect(std::span<const AssayVector> vectors,
                        std::span<const size_t> k_candidates, uint64_t seed,
                        size_t max_iter = 300, double tol = 1e-6);

// A vectorizer and a statement-bearing cluster model, as served.
struct Semantifier {
  VectorizerModel vectorizer;
  ClusterModel clusters;

  // Vectorizes text (TF-IDF models only) then semantifies.
  SemantificationResult SemantifyText(std::string_view text, uint32_t threshold) const;
  SemantificationResult SemantifyRecord(const BioassayRecord& record,
                                        uint32_t threshold) const;

  nlohmann::json ToJson() const;
  static Semantifier FromJson(const nlohmann::json& j);
  void Save(const std::filesystem::path& path) const;
  // Throws Error(kIo) or Error(kFormat); a bare cluster model file is a
  // format error since it carries no vectorizer.
  static Semantifier Load(const std::filesystem::path& path);
};

// Fits TF-IDF on the record texts, then k-means, then attaches statements.
Semantifier FitSemantifier(std::span<const BioassayRecord> train, const KMeansOptions& options);

void SaveClusterModel(const ClusterModel& model, const std::filesystem::path& path);

}  // namespace assaysem

#endif  // ASSAYSEM_CLUSTER_H_
