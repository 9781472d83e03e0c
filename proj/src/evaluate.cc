// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/evaluate.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "assaysem/baseline.h"
#include "assaysem/cluster.h"
#include "assaysem/error.h"
#include "assaysem/random.h"

namespace assaysem {

namespace {

struct FoldData {
  std::vector<BioassayRecord> train;
  std::vector<BioassayRecord> test;  // labeled test records only
  size_t skipped_unlabeled = 0;
  std::shared_ptr<const VectorizerModel> vectorizer;
  std::vector<AssayVector> train_vectors;
  std::vector<std::string> train_ids;
  std::vector<AssayVector> test_vectors;
};

Error WithContext(const Error& e, const std::string& context) {
  return Error(e.code(), context + ": " + e.what());
}

// Runs task(i) for i in [0, count) on up to `threads` workers. Exceptions are
// rethrown in task order so failures are reported deterministically.
template <typename Task>
void ParallelFor(size_t count, size_t threads, Task task) {
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](size_t i) {
    try {
      task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  threads = std::max<size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (size_t i = 0; i < count; ++i) run(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    for (size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (size_t i = next++; i < count; i = next++) run(i);
      });
    }
    for (auto& w : workers) w.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string FormatValue(std::optional<double> v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

std::string FormatValue(double v) { return FormatValue(std::optional<double>(v)); }

std::string FoldLabel(int fold) { return fold < 0 ? "avg" : std::to_string(fold); }

}  // namespace

Metrics MetricsFromCounts(uint64_t tp, uint64_t fp, uint64_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  double p = m.precision.value_or(0.0), r = m.recall.value_or(0.0);
  m.f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return m;
}

Metrics MicroMetrics(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "no prediction pairs");
  uint64_t tp = 0, fp = 0, fn = 0;
  for (const auto& pair : pairs) {
    uint64_t hit = 0;
    for (const auto& s : pair.predicted) hit += pair.gold.count(s);
    tp += hit;
    fp += pair.predicted.size() - hit;
    fn += pair.gold.size() - hit;
  }
  return MetricsFromCounts(tp, fp, fn);
}

std::string_view MethodName(Method method) {
  return method == Method::kNaive ? "naive" : "cluster";
}

EvalReport AverageFolds(std::span<const EvalReport> folds) {
  if (folds.empty()) throw Error(ErrorCode::kInvalidArgument, "no fold reports to average");
  EvalReport avg;
  avg.config = folds.front().config;
  avg.config.fold = -1;
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  size_t p_n = 0, r_n = 0;
  for (const auto& f : folds) {
    avg.metrics.tp += f.metrics.tp;
    avg.metrics.fp += f.metrics.fp;
    avg.metrics.fn += f.metrics.fn;
    if (f.metrics.precision) {
      p_sum += *f.metrics.precision;
      ++p_n;
    }
    if (f.metrics.recall) {
      r_sum += *f.metrics.recall;
      ++r_n;
    }
    f_sum += f.metrics.f1;
  }
  if (p_n > 0) avg.metrics.precision = p_sum / static_cast<double>(p_n);
  if (r_n > 0) avg.metrics.recall = r_sum / static_cast<double>(r_n);
  avg.metrics.f1 = f_sum / static_cast<double>(folds.size());
  avg.metadata = {{"folds", folds.size()},
                  {"precision_defined_folds", p_n},
                  {"recall_defined_folds", r_n}};
  bool degenerate = false;
  for (const auto& f : folds) degenerate |= f.metadata.value("degenerate", false);
  if (avg.config.method == Method::kCluster) avg.metadata["degenerate"] = degenerate;
  return avg;
}

std::vector<EvalReport> RunGrid(const Corpus& corpus, std::span<const FoldSplit> folds,
                                const GridSpec& spec) {
  if (folds.empty()) throw Error(ErrorCode::kInvalidArgument, "no folds");
  const bool naive = spec.method == Method::kNaive;
  const std::vector<size_t>& params = naive ? spec.top_ns : spec.ks;
  if (params.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                naive ? "naive grid needs top-n values" : "cluster grid needs k values");
  }
  std::vector<uint32_t> thresholds = naive ? std::vector<uint32_t>{0} : spec.thresholds;
  if (thresholds.empty()) throw Error(ErrorCode::kInvalidArgument, "no thresholds");
  for (uint32_t t : thresholds) {
    if (!naive && t == 0) throw Error(ErrorCode::kInvalidArgument, "threshold must be >= 1");
  }
  if (!naive && spec.vectorizer.kind == VectorizerKind::kExternal &&
      !spec.vectorizer.embeddings) {
    throw Error(ErrorCode::kInvalidArgument, "embedding vectorizer without embeddings");
  }

  const size_t nf = folds.size();
  std::vector<FoldData> data(nf);
  ParallelFor(nf, spec.threads, [&](size_t f) {
    const std::string context = "fold " + std::to_string(folds[f].fold_index);
    try {
      FoldData& d = data[f];
      d.train = corpus.Select(folds[f].train_ids);
      for (auto& r : corpus.Select(folds[f].test_ids)) {
        if (r.statements.empty()) {
          ++d.skipped_unlabeled;
        } else {
          d.test.push_back(std::move(r));
        }
      }
      if (d.test.empty()) throw Error(ErrorCode::kInvalidArgument, "no labeled test records");
      if (naive) return;
      if (spec.vectorizer.kind == VectorizerKind::kTfidf) {
        std::vector<std::string> texts;
        texts.reserve(d.train.size());
        for (const auto& r : d.train) texts.push_back(r.text);
        d.vectorizer = std::make_shared<const VectorizerModel>(VectorizerModel::FitTfidf(texts));
      } else {
        d.vectorizer = spec.vectorizer.embeddings;
      }
      for (const auto& r : d.train) {
        d.train_vectors.push_back(d.vectorizer->Transform(r));
        d.train_ids.push_back(r.id);
      }
      for (const auto& r : d.test) d.test_vectors.push_back(d.vectorizer->Transform(r));
    } catch (const Error& e) {
      throw WithContext(e, context);
    }
  });

  // cells[p][t][f]
  const size_t np = params.size(), nt = thresholds.size();
  std::vector<EvalReport> cells(np * nt * nf);
  auto cell = [&](size_t p, size_t t, size_t f) -> EvalReport& {
    return cells[(p * nt + t) * nf + f];
  };

  std::vector<FrequencyTable> tables;
  if (naive) {
    tables.resize(nf);
    for (size_t f = 0; f < nf; ++f) {
      tables[f] = spec.include_test
                      ? BuildFrequencyTable(corpus.records())
                      : BuildFrequencyTable(data[f].train);
    }
  }

  ParallelFor(np * nf, spec.threads, [&](size_t task) {
    const size_t p = task / nf, f = task % nf;
    const FoldData& d = data[f];
    const int fold_index = static_cast<int>(folds[f].fold_index);
    const std::string context = "fold " + std::to_string(fold_index) +
                                (naive ? ", top " : ", k=") + std::to_string(params[p]);
    try {
      if (naive) {
        StatementSet predicted = NaiveSemantify(tables[f], params[p]);
        std::vector<PredictionPair> pairs;
        pairs.reserve(d.test.size());
        for (const auto& r : d.test) pairs.push_back({r.id, predicted, r.statements});
        EvalReport& rep = cell(p, 0, f);
        rep.config = {Method::kNaive, "none", params[p], 0, spec.seed, fold_index,
                      spec.include_test};
        rep.metrics = MicroMetrics(pairs);
        rep.metadata = {{"train", d.train.size()},
                        {"test", d.test.size()},
                        {"skipped_unlabeled", d.skipped_unlabeled},
                        {"table_size", tables[f].ranked.size()}};
        return;
      }
      const uint64_t seed = DeriveSeed(spec.seed, {folds[f].fold_index, params[p]});
      ClusterModel model =
          FitKMeans(d.train_vectors, d.train_ids, {params[p], seed, spec.max_iter, spec.tol});
      model.vectorizer_fingerprint = d.vectorizer->Fingerprint();
      model = AttachStatements(std::move(model), d.train);
      std::vector<std::pair<uint32_t, double>> nearest;
      nearest.reserve(d.test.size());
      for (const auto& v : d.test_vectors) nearest.push_back(model.Nearest(v));
      nlohmann::json meta = {
          {"train", d.train.size()},
          {"test", d.test.size()},
          {"skipped_unlabeled", d.skipped_unlabeled},
          {"cell_seed", seed},
          {"vectorizer_kind", VectorizerKindName(d.vectorizer->kind())},
          {"vectorizer_fingerprint", model.vectorizer_fingerprint},
          {"dimension", d.vectorizer->dimension()},
          {"vectorizer_meta", d.vectorizer->metadata()},
          {"max_iter", spec.max_iter},
          {"tol", spec.tol},
          {"inertia", model.inertia},
          {"iterations", model.iterations},
          {"converged", model.converged},
          {"repairs", model.repairs},
          {"empty_clusters", model.empty_clusters},
          {"degenerate", model.degenerate()}};
      if (d.vectorizer->kind() == VectorizerKind::kTfidf) meta["vocabulary"] = d.vectorizer->dimension();
      for (size_t t = 0; t < nt; ++t) {
        std::vector<PredictionPair> pairs;
        pairs.reserve(d.test.size());
        for (size_t i = 0; i < d.test.size(); ++i) {
          PredictionPair pair{d.test[i].id, {}, d.test[i].statements};
          if (!d.test_vectors[i].is_zero()) {
            for (const auto& [s, count] : model.statement_freq[nearest[i].first]) {
              if (count >= thresholds[t]) pair.predicted.insert(s);
            }
          }
          pairs.push_back(std::move(pair));
        }
        EvalReport& rep = cell(p, t, f);
        rep.config = {Method::kCluster, spec.vectorizer.Label(), params[p], thresholds[t],
                      spec.seed, fold_index, false};
        rep.metrics = MicroMetrics(pairs);
        rep.metadata = meta;
      }
    } catch (const Error& e) {
      throw WithContext(e, context);
    }
  });

  std::vector<EvalReport> out;
  out.reserve(np * nt * (nf + 1));
  for (size_t p = 0; p < np; ++p) {
    for (size_t t = 0; t < nt; ++t) {
      std::vector<EvalReport> per_fold;
      for (size_t f = 0; f < nf; ++f) per_fold.push_back(cell(p, t, f));
      EvalReport avg = AverageFolds(per_fold);
      for (auto& r : per_fold) out.push_back(std::move(r));
      out.push_back(std::move(avg));
    }
  }
  return out;
}

CvResult RunCv(const Corpus& corpus, const MethodConfig& config,
               std::span<const FoldSplit> folds) {
  GridSpec spec;
  spec.method = config.method;
  spec.vectorizer = config.vectorizer;
  spec.include_test = config.include_test;
  spec.seed = config.seed;
  spec.max_iter = config.max_iter;
  spec.tol = config.tol;
  if (config.method == Method::kNaive) {
    spec.top_ns = {config.k};
  } else {
    spec.ks = {config.k};
    spec.thresholds = {config.threshold};
  }
  std::vector<EvalReport> reports = RunGrid(corpus, folds, spec);
  CvResult result;
  for (auto& r : reports) {
    if (r.config.fold < 0) {
      result.average = std::move(r);
    } else {
      result.folds.push_back(std::move(r));
    }
  }
  return result;
}

std::string EmitResultGrid(std::span<const EvalReport> reports, GridLayout layout) {
  std::ostringstream out;
  if (layout == GridLayout::kRuns) {
    out << "method,vectorizer,k,threshold,fold,P,R,F1\n";
    for (const auto& r : reports) {
      out << MethodName(r.config.method) << ',' << r.config.vectorizer << ','
          << r.config.k << ','
          << (r.config.method == Method::kNaive ? std::string() : std::to_string(r.config.threshold))
          << ',' << FoldLabel(r.config.fold) << ',' << FormatValue(r.metrics.precision) << ','
          << FormatValue(r.metrics.recall) << ',' << FormatValue(r.metrics.f1) << '\n';
    }
    return out.str();
  }

  if (layout == GridLayout::kTable1) {
    out << "n,P,R,F1\n";
    std::map<size_t, const EvalReport*> rows;
    for (const auto& r : reports) {
      if (r.config.method == Method::kNaive && r.config.fold < 0) rows[r.config.k] = &r;
    }
    for (const auto& [n, r] : rows) {
      out << n << ',' << FormatValue(r->metrics.precision) << ','
          << FormatValue(r->metrics.recall) << ',' << FormatValue(r->metrics.f1) << '\n';
    }
    return out.str();
  }

  static constexpr uint32_t kThresholds[] = {4, 3, 2, 1};
  static constexpr const char* kVectorizers[] = {"tfidf", "embedding"};
  out << "k";
  for (uint32_t t : kThresholds) {
    for (const char* v : kVectorizers) {
      for (const char* col : {"P", "R", "F1", "mark"}) {
        out << ",freq>=" << t << '_' << v << '_' << col;
      }
    }
  }
  out << '\n';

  std::map<std::tuple<size_t, uint32_t, std::string>, const EvalReport*> index;
  std::set<size_t> ks;
  for (const auto& r : reports) {
    if (r.config.method != Method::kCluster || r.config.fold >= 0) continue;
    index[{r.config.k, r.config.threshold, r.config.vectorizer}] = &r;
    ks.insert(r.config.k);
  }
  std::vector<size_t> rows(ks.begin(), ks.end());
  // Per block: best row and the rounded F1 of each row for trend arrows.
  struct Block {
    std::optional<size_t> best;
    std::vector<std::optional<double>> f1;
  };
  std::vector<Block> blocks;
  for (uint32_t t : kThresholds) {
    for (const char* v : kVectorizers) {
      Block b;
      double best = -1.0;
      for (size_t i = 0; i < rows.size(); ++i) {
        auto it = index.find({rows[i], t, v});
        if (it == index.end()) {
          b.f1.push_back(std::nullopt);
          continue;
        }
        double f1 = it->second->metrics.f1;
        b.f1.push_back(std::round(f1 * 100.0) / 100.0);
        if (f1 > best) {
          best = f1;
          b.best = i;
        }
      }
      blocks.push_back(std::move(b));
    }
  }
  for (size_t i = 0; i < rows.size(); ++i) {
    out << rows[i];
    size_t b = 0;
    for (uint32_t t : kThresholds) {
      for (const char* v : kVectorizers) {
        const Block& block = blocks[b++];
        auto it = index.find({rows[i], t, v});
        if (it == index.end()) {
          out << ",MISSING,MISSING,MISSING,";
          continue;
        }
        const Metrics& m = it->second->metrics;
        std::string mark;
        if (block.best == i) mark += '*';
        if (i > 0 && block.f1[i - 1] && block.f1[i]) {
          if (*block.f1[i] > *block.f1[i - 1]) mark += "↑";
          if (*block.f1[i] < *block.f1[i - 1]) mark += "↓";
        }
        out << ',' << FormatValue(m.precision) << ',' << FormatValue(m.recall) << ','
            << FormatValue(m.f1) << ',' << mark;
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace assaysem
