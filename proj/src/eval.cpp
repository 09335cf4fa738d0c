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

#include "hyperprobe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "hyperprobe/error.hpp"
#include "hyperprobe/parallel.hpp"

namespace hyperprobe::eval {

using Json = nlohmann::ordered_json;
using probes::Task;

namespace {

constexpr std::size_t kBucketWidth = 5;
constexpr std::size_t kBucketMax = 60;

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

struct SentenceStats {
  std::size_t length = 0;
  std::size_t edges_correct = 0;
  std::size_t edges_total = 0;
  std::optional<double> dspr;
  std::optional<bool> root_correct;
  std::optional<double> nspr;
  std::vector<Edge> predicted;
};

std::vector<LengthBucket> empty_buckets() {
  std::vector<LengthBucket> out;
  for (std::size_t lo = 1; lo <= kBucketMax; lo += kBucketWidth) {
    LengthBucket b;
    b.lo = lo;
    b.hi = lo + kBucketWidth - 1;
    out.push_back(b);
  }
  return out;
}

LengthBucket* bucket_for(std::vector<LengthBucket>& buckets, std::size_t length) {
  if (length < 1 || length > kBucketMax) return nullptr;
  return &buckets[(length - 1) / kBucketWidth];
}

bool wants_edges(Task t) { return t == Task::distance || t == Task::joint; }
bool wants_depth(Task t) { return t == Task::depth || t == Task::joint; }

void echo_model(EvalReport& r, const probes::ProbeModel& model, const EvalOptions& options) {
  r.task = probes::to_string(model.task);
  r.geometry = probes::to_string(model.geometry());
  r.rank = model.rank();
  if (const auto* p = std::get_if<probes::PoincareProbeParams>(&model.probe)) {
    r.curvature = p->ball.c.value();
  }
  r.layer = options.layer;
  r.include_punct = options.punctuation.include_punct;
  r.uuas_averaging = options.macro_uuas ? "macro" : "micro";
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json report_json(const EvalReport& r) {
  Json j;
  j["task"] = r.task;
  j["geometry"] = r.geometry;
  j["rank"] = r.rank;
  j["curvature"] = r.geometry == "poincare" ? Json(r.curvature) : Json(nullptr);
  j["layer"] = r.layer ? Json(*r.layer) : Json(nullptr);
  j["include_punct"] = r.include_punct;
  j["uuas_averaging"] = r.uuas_averaging;
  j["sentences"] = r.sentences;
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  j["metrics"] = metrics;
  Json buckets = Json::array();
  for (const auto& b : r.length_buckets) {
    Json e;
    e["lengths"] = std::to_string(b.lo) + "-" + std::to_string(b.hi);
    e["sentences"] = b.sentences;
    if (r.task == "sentiment") {
      e["accuracy"] = optional_json(b.accuracy);
    } else {
      if (r.metrics.count("uuas")) {
        e["uuas"] = optional_json(b.uuas);
        e["dspr"] = optional_json(b.dspr);
      }
      if (r.metrics.count("root_acc") || r.metrics.count("nspr")) e["root_acc"] = optional_json(b.root_acc);
    }
    buckets.push_back(e);
  }
  j["length_buckets"] = buckets;
  if (r.edges) {
    Json e;
    Json pred = Json::object(), gold = Json::object();
    for (const auto& [len, n] : r.edges->predicted_lengths) pred[std::to_string(len)] = n;
    for (const auto& [len, n] : r.edges->gold_lengths) gold[std::to_string(len)] = n;
    e["predicted_lengths"] = pred;
    e["gold_lengths"] = gold;
    Json rel = Json::array();
    for (const auto& rr : r.edges->relations) {
      rel.push_back(Json{{"relation", rr.relation},
                         {"gold", rr.gold},
                         {"recovered", rr.recovered},
                         {"recall", rr.recall()},
                         {"mean_gold_length", rr.mean_gold_length}});
    }
    e["relations"] = rel;
    j["edge_lengths"] = e;
  }
  j["notes"] = r.notes;
  return j;
}

}  // namespace

// ---- decoding and scoring -------------------------------------------------

std::vector<Edge> mst_decode(const Eigen::MatrixXd& weights, const std::vector<bool>& eligible) {
  const auto t = static_cast<int>(weights.rows());
  if (weights.cols() != t || static_cast<int>(eligible.size()) != t) {
    throw UsageError("mst_decode: weight matrix and mask sizes disagree");
  }
  std::vector<int> vertices;
  for (int i = 0; i < t; ++i)
    if (eligible[i]) vertices.push_back(i);
  std::vector<Edge> edges;
  if (vertices.size() < 2) return edges;

  using Key = std::tuple<double, int, int>;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<Key> best(t, Key{inf, t, t});
  std::vector<int> link(t, -1);
  std::vector<bool> in_tree(t, false);
  auto relax = [&](int u) {
    for (int v : vertices) {
      if (in_tree[v]) continue;
      const Key k{weights(u, v), std::min(u, v), std::max(u, v)};
      if (k < best[v]) {
        best[v] = k;
        link[v] = u;
      }
    }
  };
  in_tree[vertices[0]] = true;
  relax(vertices[0]);
  for (std::size_t added = 1; added < vertices.size(); ++added) {
    int pick = -1;
    for (int v : vertices) {
      if (!in_tree[v] && (pick < 0 || best[v] < best[pick])) pick = v;
    }
    in_tree[pick] = true;
    edges.emplace_back(std::min(pick, link[pick]), std::max(pick, link[pick]));
    relax(pick);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<Edge> gold_edges(const data::SentenceRecord& record, const std::vector<bool>& eligible) {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < record.size(); ++i) {
    const int h = record.head[i] - 1;
    if (h < 0 || !eligible[i] || !eligible[static_cast<std::size_t>(h)]) continue;
    const int a = static_cast<int>(i);
    out.emplace_back(std::min(a, h), std::max(a, h));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double tree_weight(const Eigen::MatrixXd& weights, const std::vector<Edge>& edges) {
  double w = 0.0;
  for (const auto& [a, b] : edges) w += weights(a, b);
  return w;
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("spearman: length mismatch");
  if (a.size() < 2) return std::nullopt;
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

void LengthBucketedMean::add(std::size_t length, double value) {
  if (length < lo_ || length > hi_) return;
  auto& g = groups_[length];
  g.first += value;
  g.second += 1;
}

std::optional<double> LengthBucketedMean::value() const {
  if (groups_.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [len, g] : groups_) sum += g.first / static_cast<double>(g.second);
  return sum / static_cast<double>(groups_.size());
}

std::size_t LengthBucketedMean::count() const {
  std::size_t n = 0;
  for (const auto& [len, g] : groups_) n += g.second;
  return n;
}

// ---- evaluation -----------------------------------------------------------

SyntaxPrediction predict(const probes::ProbeModel& model, const data::SentenceRecord& record) {
  return {probes::predicted_distances(model.probe, record.embedding),
          probes::predicted_depths(model.probe, record.embedding)};
}

EdgeLengthAnalysis edge_length_analysis(const std::vector<data::SentenceRecord>& records,
                                        const std::vector<std::vector<Edge>>& predicted,
                                        const data::PunctuationSet& punctuation) {
  if (records.size() != predicted.size()) throw UsageError("edge_length_analysis: size mismatch");
  EdgeLengthAnalysis out;
  struct Acc {
    std::size_t gold = 0, recovered = 0;
    double length_sum = 0.0;
  };
  std::map<std::string, Acc> by_rel;
  for (std::size_t s = 0; s < records.size(); ++s) {
    const auto& rec = records[s];
    const auto mask = punctuation.eligible(rec);
    const std::set<Edge> pred(predicted[s].begin(), predicted[s].end());
    for (const auto& [a, b] : predicted[s]) out.predicted_lengths[b - a] += 1;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      const int h = rec.head[i] - 1;
      if (h < 0 || !mask[i] || !mask[static_cast<std::size_t>(h)]) continue;
      const int a = std::min(static_cast<int>(i), h), b = std::max(static_cast<int>(i), h);
      out.gold_lengths[b - a] += 1;
      Acc& acc = by_rel[i < rec.deprel.size() ? rec.deprel[i] : "_"];
      acc.gold += 1;
      acc.recovered += pred.count({a, b});
      acc.length_sum += b - a;
    }
  }
  for (const auto& [rel, acc] : by_rel) {
    out.relations.push_back(
        {rel, acc.gold, acc.recovered, acc.length_sum / static_cast<double>(acc.gold)});
  }
  std::stable_sort(out.relations.begin(), out.relations.end(),
                   [](const RelationRecall& x, const RelationRecall& y) {
                     return x.mean_gold_length > y.mean_gold_length;
                   });
  return out;
}

EvalReport evaluate_syntax(const probes::ProbeModel& model,
                           std::span<const data::SyntaxExample> corpus,
                           const EvalOptions& options) {
  if (model.task == Task::sentiment) throw UsageError("sentiment probe evaluated on a treebank");
  EvalReport report;
  echo_model(report, model, options);
  report.sentences = corpus.size();

  std::vector<SentenceStats> stats(corpus.size());
  parallel_for(corpus.size(), options.threads, [&](std::size_t s) {
    const auto& ex = corpus[s];
    const auto& rec = ex.record;
    const std::size_t t = rec.size();
    SentenceStats& st = stats[s];
    st.length = t;
    const auto mask = options.punctuation.eligible(rec);
    const SyntaxPrediction pred = predict(model, rec);

    st.predicted = mst_decode(pred.distances, mask);
    const auto gold = gold_edges(rec, mask);
    st.edges_total = gold.size();
    std::vector<Edge> common;
    std::set_intersection(st.predicted.begin(), st.predicted.end(), gold.begin(), gold.end(),
                          std::back_inserter(common));
    st.edges_correct = common.size();

    std::vector<double> pd, gd;
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = i + 1; j < t; ++j) {
        pd.push_back(pred.distances(i, j));
        gd.push_back(ex.gold.dist(i, j));
      }
    st.dspr = spearman(pd, gd);

    std::vector<double> pdep, gdep;
    int best = -1;
    for (std::size_t i = 0; i < t; ++i) {
      if (!mask[i]) continue;
      pdep.push_back(pred.depths(i));
      gdep.push_back(ex.gold.depth(i));
      if (best < 0 || pred.depths(i) < pred.depths(best)) best = static_cast<int>(i);
    }
    if (best >= 0) st.root_correct = static_cast<std::size_t>(best) == rec.root();
    st.nspr = spearman(pdep, gdep);
  });

  std::size_t correct = 0, total = 0, macro_n = 0, roots = 0, root_n = 0;
  double macro_sum = 0.0;
  LengthBucketedMean dspr, nspr;
  auto buckets = empty_buckets();
  struct BucketAcc {
    std::size_t correct = 0, total = 0, roots = 0, root_n = 0, dspr_n = 0;
    double dspr_sum = 0.0;
  };
  std::vector<BucketAcc> bacc(buckets.size());
  for (const auto& st : stats) {
    correct += st.edges_correct;
    total += st.edges_total;
    if (st.edges_total) {
      macro_sum += static_cast<double>(st.edges_correct) / static_cast<double>(st.edges_total);
      ++macro_n;
    }
    if (st.dspr) dspr.add(st.length, *st.dspr);
    if (st.nspr) nspr.add(st.length, *st.nspr);
    if (st.root_correct) {
      roots += *st.root_correct;
      ++root_n;
    }
    if (LengthBucket* b = bucket_for(buckets, st.length)) {
      BucketAcc& a = bacc[static_cast<std::size_t>(b - buckets.data())];
      b->sentences += 1;
      a.correct += st.edges_correct;
      a.total += st.edges_total;
      if (st.dspr) {
        a.dspr_sum += *st.dspr;
        ++a.dspr_n;
      }
      if (st.root_correct) {
        a.roots += *st.root_correct;
        ++a.root_n;
      }
    }
  }
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const BucketAcc& a = bacc[i];
    if (a.total) buckets[i].uuas = static_cast<double>(a.correct) / static_cast<double>(a.total);
    if (a.dspr_n) buckets[i].dspr = a.dspr_sum / static_cast<double>(a.dspr_n);
    if (a.root_n) buckets[i].root_acc = static_cast<double>(a.roots) / static_cast<double>(a.root_n);
  }
  report.length_buckets = std::move(buckets);

  if (wants_edges(model.task)) {
    if (total) {
      report.metrics["uuas"] = options.macro_uuas
                                   ? macro_sum / static_cast<double>(macro_n)
                                   : static_cast<double>(correct) / static_cast<double>(total);
    } else {
      report.notes.push_back("uuas undefined: no gold edges between eligible tokens");
    }
    if (auto v = dspr.value()) report.metrics["dspr"] = *v;
    else report.notes.push_back("dspr undefined: no scorable sentence of length 5-50");
    std::vector<data::SentenceRecord> records;
    std::vector<std::vector<Edge>> predicted;
    for (std::size_t s = 0; s < corpus.size(); ++s) {
      records.push_back(corpus[s].record);
      records.back().embedding.resize(0, 0);
      predicted.push_back(stats[s].predicted);
    }
    report.edges = edge_length_analysis(records, predicted, options.punctuation);
  }
  if (wants_depth(model.task)) {
    if (root_n) report.metrics["root_acc"] = static_cast<double>(roots) / static_cast<double>(root_n);
    if (auto v = nspr.value()) report.metrics["nspr"] = *v;
    else report.notes.push_back("nspr undefined: no scorable sentence of length 5-50");
  }
  report.notes.push_back("dspr and nspr average per-sentence Spearman within each length 5-50, then across lengths");
  report.notes.push_back(options.punctuation.include_punct
                             ? "punctuation included in uuas edges and root/nspr candidates"
                             : "punctuation excluded from uuas edges and root/nspr candidates");
  return report;
}

EvalReport evaluate_sentiment(const probes::ProbeModel& model,
                              std::span<const data::SentimentExample> corpus,
                              const EvalOptions& options) {
  if (model.task != Task::sentiment || !model.heads) {
    throw UsageError("syntax probe evaluated on a sentiment corpus");
  }
  EvalReport report;
  echo_model(report, model, options);
  report.sentences = corpus.size();
  std::vector<int> correct(corpus.size(), 0);
  parallel_for(corpus.size(), options.threads, [&](std::size_t s) {
    if (corpus[s].size() == 0) return;
    correct[s] = probes::sentiment_logits(model, corpus[s].embedding).predicted() == corpus[s].label;
  });
  auto buckets = empty_buckets();
  std::vector<std::pair<std::size_t, std::size_t>> bacc(buckets.size());
  std::size_t right = 0, scored = 0;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (corpus[s].size() == 0) continue;
    ++scored;
    right += static_cast<std::size_t>(correct[s]);
    if (LengthBucket* b = bucket_for(buckets, corpus[s].size())) {
      auto& a = bacc[static_cast<std::size_t>(b - buckets.data())];
      b->sentences += 1;
      a.first += static_cast<std::size_t>(correct[s]);
      a.second += 1;
    }
  }
  for (std::size_t i = 0; i < buckets.size(); ++i)
    if (bacc[i].second)
      buckets[i].accuracy = static_cast<double>(bacc[i].first) / static_cast<double>(bacc[i].second);
  report.length_buckets = std::move(buckets);
  if (scored) report.metrics["accuracy"] = static_cast<double>(right) / static_cast<double>(scored);
  if (scored < corpus.size()) report.notes.push_back("empty sentences were not scored");
  report.notes.push_back("equal logits predict the negative label");
  report.notes.push_back(model.heads->trainable ? "meta-embeddings trainable" : "meta-embeddings fixed");
  return report;
}

std::string to_json(const EvalReport& report, int indent) { return report_json(report).dump(indent); }

// ---- sweeps ---------------------------------------------------------------

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::layer: return "layer";
    case SweepAxis::rank: return "rank";
    case SweepAxis::curvature: return "curvature";
    case SweepAxis::sentence_length: return "sentence_length";
  }
  return "?";
}

SweepAxis parse_sweep_axis(const std::string& s) {
  for (SweepAxis a : {SweepAxis::layer, SweepAxis::rank, SweepAxis::curvature, SweepAxis::sentence_length})
    if (s == to_string(a)) return a;
  throw UsageError("unknown sweep axis '" + s + "'");
}

namespace {

template <typename Example, typename TrainFn, typename EvalFn>
SweepReport sweep_impl(SweepAxis axis, const std::vector<double>& grid, const train::TrainConfig& base,
                       const SplitProvider<Example>& provider, const EvalOptions& options,
                       TrainFn train_fn, EvalFn eval_fn) {
  if (grid.empty()) throw UsageError("sweep grid is empty");
  SweepReport out;
  out.axis = to_string(axis);
  if (axis == SweepAxis::curvature && base.geometry != probes::Geometry::poincare) {
    throw UsageError("curvature sweep needs the poincare geometry");
  }
  for (double v : grid) {
    if (axis == SweepAxis::rank && (v < 1 || v != std::floor(v))) throw UsageError("rank grid values must be positive integers");
    if (axis == SweepAxis::curvature && !(v > 0)) throw UsageError("curvature grid values must be positive");
    if (axis == SweepAxis::layer && v != std::floor(v)) throw UsageError("layer grid values must be integers");
  }
  auto run_point = [&](const train::TrainConfig& cfg, const Split<Example>& split, EvalOptions eo,
                       SweepPoint& point) {
    const train::TrainResult tr = train_fn(cfg, split);
    point.best_epoch = tr.best_epoch;
    point.best_dev_loss = tr.best_dev_loss;
    if (tr.diverged) point.notice = tr.stop_reason;
    point.report = eval_fn(tr.model, split.dev, eo);
  };

  const int base_layer = options.layer.value_or(-1);
  if (axis == SweepAxis::layer) {
    for (double v : grid) {
      SweepPoint point;
      point.value = v;
      const auto split = provider(static_cast<int>(v));
      if (!split) {
        point.notice = "layer " + std::to_string(static_cast<int>(v)) + " unavailable; skipped";
        out.notes.push_back(point.notice);
      } else {
        EvalOptions eo = options;
        eo.layer = static_cast<int>(v);
        run_point(base, *split, eo, point);
      }
      out.points.push_back(std::move(point));
    }
    return out;
  }

  const auto split = provider(base_layer);
  if (!split) throw DataError("sweep corpus unavailable");
  if (axis == SweepAxis::sentence_length) {
    SweepPoint whole;
    run_point(base, *split, options, whole);
    for (double v : grid) {
      SweepPoint point;
      point.value = v;
      point.best_epoch = whole.best_epoch;
      point.best_dev_loss = whole.best_dev_loss;
      const auto it = std::find_if(whole.report->length_buckets.begin(), whole.report->length_buckets.end(),
                                   [&](const LengthBucket& b) { return v >= b.lo && v <= b.hi; });
      if (it == whole.report->length_buckets.end()) {
        point.notice = "length outside 1-60; skipped";
      } else {
        EvalReport r = *whole.report;
        r.metrics.clear();
        r.edges.reset();
        r.sentences = it->sentences;
        if (it->uuas) r.metrics["uuas"] = *it->uuas;
        if (it->dspr) r.metrics["dspr"] = *it->dspr;
        if (it->root_acc) r.metrics["root_acc"] = *it->root_acc;
        if (it->accuracy) r.metrics["accuracy"] = *it->accuracy;
        r.length_buckets = {*it};
        r.notes.push_back("bucket " + std::to_string(it->lo) + "-" + std::to_string(it->hi) +
                          " of a single run; dspr is the plain mean over the bucket");
        point.report = std::move(r);
      }
      out.points.push_back(std::move(point));
    }
    return out;
  }
  for (double v : grid) {
    train::TrainConfig cfg = base;
    if (axis == SweepAxis::rank) cfg.rank = static_cast<Eigen::Index>(v);
    else cfg.curvature = v;
    SweepPoint point;
    point.value = v;
    run_point(cfg, *split, options, point);
    out.points.push_back(std::move(point));
  }
  return out;
}

}  // namespace

SweepReport sweep_syntax(SweepAxis axis, const std::vector<double>& grid,
                         const train::TrainConfig& base,
                         const SplitProvider<data::SyntaxExample>& provider,
                         const EvalOptions& options) {
  return sweep_impl<data::SyntaxExample>(
      axis, grid, base, provider, options,
      [](const train::TrainConfig& c, const Split<data::SyntaxExample>& s) {
        return train::train_syntax(c, s.train, s.dev);
      },
      [](const probes::ProbeModel& m, const std::vector<data::SyntaxExample>& dev, const EvalOptions& o) {
        return evaluate_syntax(m, dev, o);
      });
}

SweepReport sweep_sentiment(SweepAxis axis, const std::vector<double>& grid,
                            const train::TrainConfig& base,
                            const SplitProvider<data::SentimentExample>& provider,
                            const EvalOptions& options) {
  return sweep_impl<data::SentimentExample>(
      axis, grid, base, provider, options,
      [](const train::TrainConfig& c, const Split<data::SentimentExample>& s) {
        return train::train_sentiment(c, s.train, s.dev);
      },
      [](const probes::ProbeModel& m, const std::vector<data::SentimentExample>& dev,
         const EvalOptions& o) { return evaluate_sentiment(m, dev, o); });
}

std::string to_json(const SweepReport& report, int indent) {
  Json j;
  j["axis"] = report.axis;
  Json pts = Json::array();
  for (const auto& p : report.points) {
    Json e;
    e["value"] = p.value;
    e["best_epoch"] = p.best_epoch;
    e["best_dev_loss"] = std::isfinite(p.best_dev_loss) ? Json(p.best_dev_loss) : Json(nullptr);
    e["notice"] = p.notice.empty() ? Json(nullptr) : Json(p.notice);
    e["report"] = p.report ? report_json(*p.report) : Json(nullptr);
    pts.push_back(e);
  }
  j["points"] = pts;
  j["notes"] = report.notes;
  return j.dump(indent);
}

std::string to_tsv(const SweepReport& report) {
  std::set<std::string> names;
  for (const auto& p : report.points)
    if (p.report)
      for (const auto& [k, v] : p.report->metrics) names.insert(k);
  std::ostringstream out;
  out.precision(17);
  out << report.axis;
  for (const auto& n : names) out << '\t' << n;
  out << '\n';
  for (const auto& p : report.points) {
    out << p.value;
    for (const auto& n : names) {
      out << '\t';
      if (p.report) {
        const auto it = p.report->metrics.find(n);
        if (it != p.report->metrics.end()) out << it->second;
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace hyperprobe::eval
