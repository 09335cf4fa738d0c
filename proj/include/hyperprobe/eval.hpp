// Copyright 2026 The hyperprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/** Probe evaluation.
 *
 * Syntax metrics: UUAS of the minimum spanning tree over predicted squared
 * distances, DSpr (Spearman of pairwise distances), root% and NSpr (Spearman
 * of depths). Spearman scores are averaged per sentence length over lengths
 * 5..50 and the per-length means are then averaged. Sentiment: accuracy.
 *
 * Reports serialize to JSON with a fixed key order. */

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperprobe/data.hpp"
#include "hyperprobe/probes.hpp"
#include "hyperprobe/train.hpp"

namespace hyperprobe::eval {

/// Undirected edge as (smaller index, larger index), 0-based.
using Edge = std::pair<int, int>;

/// Prim's algorithm over the eligible vertices. Among equal weights the edge
/// with the lexicographically smallest (min, max) pair wins. Fewer than two
/// eligible vertices give no edges.
std::vector<Edge> mst_decode(const Eigen::MatrixXd& weights, const std::vector<bool>& eligible);

/// Head edges whose endpoints are both eligible, sorted.
std::vector<Edge> gold_edges(const data::SentenceRecord& record, const std::vector<bool>& eligible);

double tree_weight(const Eigen::MatrixXd& weights, const std::vector<Edge>& edges);

/// Spearman correlation with average ranks for ties; empty when either side
/// is constant or shorter than 2.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

/// Averages values grouped by sentence length within [lo, hi], then averages
/// the group means. Empty when no length falls in range.
class LengthBucketedMean {
 public:
  LengthBucketedMean(std::size_t lo = 5, std::size_t hi = 50) : lo_(lo), hi_(hi) {}
  void add(std::size_t length, double value);
  std::optional<double> value() const;
  std::size_t count() const;

 private:
  std::size_t lo_, hi_;
  std::map<std::size_t, std::pair<double, std::size_t>> groups_;
};

struct EvalOptions {
  data::PunctuationSet punctuation;
  bool macro_uuas = false;
  unsigned threads = 1;
  std::optional<int> layer;  ///< echoed into the report
};

struct LengthBucket {
  std::size_t lo = 0, hi = 0;
  std::size_t sentences = 0;
  std::optional<double> uuas;
  std::optional<double> dspr;  ///< plain mean of per-sentence Spearman
  std::optional<double> root_acc;
  std::optional<double> accuracy;
};

struct RelationRecall {
  std::string relation;
  std::size_t gold = 0;
  std::size_t recovered = 0;
  double mean_gold_length = 0.0;
  double recall() const { return gold ? static_cast<double>(recovered) / gold : 0.0; }
};

struct EdgeLengthAnalysis {
  std::map<int, std::size_t> predicted_lengths;  ///< |i - j| -> count
  std::map<int, std::size_t> gold_lengths;
  std::vector<RelationRecall> relations;  ///< longest mean gold length first
};

struct EvalReport {
  std::string task;
  std::string geometry;
  Eigen::Index rank = 0;
  double curvature = 0.0;
  std::optional<int> layer;
  bool include_punct = false;
  std::string uuas_averaging = "micro";
  std::size_t sentences = 0;
  /// Metric name -> value; a metric that could not be computed is absent.
  std::map<std::string, double> metrics;
  std::vector<LengthBucket> length_buckets;  ///< width 5 over [1, 60]
  std::optional<EdgeLengthAnalysis> edges;
  std::vector<std::string> notes;
};

/// Per-sentence predictions from a syntax probe.
struct SyntaxPrediction {
  Eigen::MatrixXd distances;  ///< squared
  Eigen::VectorXd depths;     ///< squared distance to the origin
};

SyntaxPrediction predict(const probes::ProbeModel& model, const data::SentenceRecord& record);

EvalReport evaluate_syntax(const probes::ProbeModel& model,
                           std::span<const data::SyntaxExample> corpus,
                           const EvalOptions& options = {});
EvalReport evaluate_sentiment(const probes::ProbeModel& model,
                              std::span<const data::SentimentExample> corpus,
                              const EvalOptions& options = {});

/// Predicted vs gold edge lengths and per-relation recall of the gold edges.
EdgeLengthAnalysis edge_length_analysis(const std::vector<data::SentenceRecord>& records,
                                        const std::vector<std::vector<Edge>>& predicted,
                                        const data::PunctuationSet& punctuation);

std::string to_json(const EvalReport& report, int indent = 2);

// ---- sweeps ---------------------------------------------------------------

enum class SweepAxis { layer, rank, curvature, sentence_length };
const char* to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& s);

template <typename Example>
struct Split {
  std::vector<Example> train;
  std::vector<Example> dev;
};

/// Returns the corpora for one layer value, or nothing when unavailable.
template <typename Example>
using SplitProvider = std::function<std::optional<Split<Example>>(int layer)>;

struct SweepPoint {
  double value = 0.0;
  std::optional<EvalReport> report;
  int best_epoch = 0;
  double best_dev_loss = 0.0;
  std::string notice;
};

struct SweepReport {
  std::string axis;
  std::vector<SweepPoint> points;
  std::vector<std::string> notes;
};

/// One train+evaluate run per grid value (the sentence_length axis runs once
/// and reports its length buckets). An empty grid is a usage error.
SweepReport sweep_syntax(SweepAxis axis, const std::vector<double>& grid,
                         const train::TrainConfig& base,
                         const SplitProvider<data::SyntaxExample>& provider,
                         const EvalOptions& options = {});
SweepReport sweep_sentiment(SweepAxis axis, const std::vector<double>& grid,
                            const train::TrainConfig& base,
                            const SplitProvider<data::SentimentExample>& provider,
                            const EvalOptions& options = {});

std::string to_json(const SweepReport& report, int indent = 2);
/// axis value, then one column per metric present in any point.
std::string to_tsv(const SweepReport& report);

}  // namespace hyperprobe::eval
