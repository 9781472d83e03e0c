// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

// Micro-averaged scoring and the cross-validation driver for both the naive
// top-n baseline and the cluster semantifier.

#ifndef ASSAYSEM_EVALUATE_H_
#define ASSAYSEM_EVALUATE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "assaysem/corpus.h"
#include "assaysem/vectorize.h"
#include "json.hpp"

namespace assaysem {

struct PredictionPair {
  std::string assay_id;
  StatementSet predicted;
  StatementSet gold;
};

struct Metrics {
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;
  std::optional<double> precision;  // unset when nothing was predicted
  std::optional<double> recall;     // unset when there is no gold
  double f1 = 0.0;
};

Metrics MetricsFromCounts(uint64_t tp, uint64_t fp, uint64_t fn);

// Pools tp/fp/fn over all pairs. Throws Error(kInvalidArgument) when empty.
Metrics MicroMetrics(std::span<const PredictionPair> pairs);

enum class Method { kNaive, kCluster };

std::string_view MethodName(Method method);

// Which vectors the cluster method runs on. TF-IDF is refitted on each
// training fold; external embeddings are looked up by assay id.
struct VectorizerSpec {
  VectorizerKind kind = VectorizerKind::kTfidf;
  std::shared_ptr<const VectorizerModel> embeddings;

  std::string Label() const { return kind == VectorizerKind::kTfidf ? "tfidf" : "embedding"; }
};

struct EvalConfig {
  Method method = Method::kCluster;
  std::string vectorizer;  // "tfidf", "embedding", or "none" for naive
  size_t k = 0;            // clusters, or n for the naive top-n method
  uint32_t threshold = 0;  // cluster method only
  uint64_t seed = 0;
  int fold = -1;  // -1 marks the fold average
  bool include_test = false;
};

struct EvalReport {
  EvalConfig config;
  Metrics metrics;
  nlohmann::json metadata = nlohmann::json::object();
};

struct GridSpec {
  Method method = Method::kCluster;
  VectorizerSpec vectorizer;
  std::vector<size_t> ks;
  std::vector<uint32_t> thresholds = {1};
  std::vector<size_t> top_ns;
  // Naive method: count statement frequencies over the whole corpus rather
  // than the training fold.
  bool include_test = false;
  uint64_t seed = 0;
  size_t max_iter = 300;
  double tol = 1e-6;
  size_t threads = 1;
};

// One report per (fold, k, threshold) cell plus one fold average per
// (k, threshold), in a deterministic order. Each (fold, k) fit uses the seed
// DeriveSeed(spec.seed, {fold, k}). Errors are rethrown with fold context.
std::vector<EvalReport> RunGrid(const Corpus& corpus, std::span<const FoldSplit> folds,
                                const GridSpec& spec);

struct MethodConfig {
  Method method = Method::kCluster;
  VectorizerSpec vectorizer;
  size_t k = 0;  // clusters or top-n
  uint32_t threshold = 1;
  bool include_test = false;
  uint64_t seed = 0;
  size_t max_iter = 300;
  double tol = 1e-6;
};

struct CvResult {
  EvalReport average;
  std::vector<EvalReport> folds;
};

CvResult RunCv(const Corpus& corpus, const MethodConfig& config,
               std::span<const FoldSplit> folds);

// Arithmetic mean over folds. Precision and recall average over the folds
// where they are defined.
EvalReport AverageFolds(std::span<const EvalReport> folds);

enum class GridLayout { kRuns, kTable1, kTable2 };

// kRuns: one CSV row per report (method, vectorizer, k, threshold, fold,
// P, R, F1). kTable1: averaged naive rows keyed by n. kTable2: averaged
// cluster rows keyed by k with P/R/F1/mark columns for each threshold block
// {4,3,2,1} x {tfidf, embedding}; the mark carries `*` on a block's best F1
// and an arrow for the F1 trend from the previous row. Absent cells print
// MISSING; an undefined precision prints NA.
std::string EmitResultGrid(std::span<const EvalReport> reports, GridLayout layout);

}  // namespace assaysem

#endif  // ASSAYSEM_EVALUATE_H_
