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

#include "hyperprobe/gradcheck.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "hyperprobe/data.hpp"
#include "hyperprobe/optim.hpp"

namespace hyperprobe::gradcheck {

using probes::Geometry;
using probes::Nonlinearity;
using probes::Task;

namespace {

std::vector<int> random_tree(int t, std::mt19937_64& rng) {
  std::vector<int> parent(t, -1);
  for (int i = 1; i < t; ++i) parent[i] = std::uniform_int_distribution<int>(0, i - 1)(rng);
  std::vector<int> perm(t);
  for (int i = 0; i < t; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> head(t);
  for (int i = 0; i < t; ++i) head[perm[i]] = parent[i] < 0 ? 0 : perm[parent[i]] + 1;
  return head;
}

Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

std::string Case::label() const {
  std::ostringstream s;
  s << probes::to_string(task) << '/' << probes::to_string(geometry);
  if (geometry == Geometry::euclidean) {
    s << '/' << probes::to_string(nonlinearity) << (two_layer ? "/2layer" : "");
  } else {
    s << "/c=" << curvature << (use_q ? "" : "/noQ");
  }
  if (task == Task::sentiment) s << (trainable_heads ? "/heads" : "/fixed");
  return s.str();
}

std::vector<Case> default_cases() {
  std::vector<Case> out;
  for (Task task : {Task::distance, Task::depth, Task::joint, Task::sentiment}) {
    for (double c : {0.1, 1.0}) {
      out.push_back({.task = task, .geometry = Geometry::poincare, .curvature = c});
      out.push_back({.task = task, .geometry = Geometry::poincare, .use_q = false, .curvature = c});
    }
    out.push_back({.task = task, .geometry = Geometry::euclidean});
    out.push_back({.task = task, .geometry = Geometry::euclidean, .two_layer = true});
    for (Nonlinearity nl : {Nonlinearity::relu, Nonlinearity::sigmoid, Nonlinearity::tanh}) {
      out.push_back({.task = task, .geometry = Geometry::euclidean, .nonlinearity = nl});
    }
    if (task == Task::sentiment) {
      out.push_back({.task = task, .geometry = Geometry::poincare, .trainable_heads = false});
      out.push_back({.task = task, .geometry = Geometry::euclidean, .trainable_heads = false});
    }
  }
  return out;
}

CaseResult run_case(const Case& spec, const Options& options) {
  std::mt19937_64 rng(options.seed);
  probes::ModelSpec ms;
  ms.task = spec.task;
  ms.geometry = spec.geometry;
  ms.input_dim = options.input_dim;
  ms.rank = options.rank;
  ms.curvature = spec.curvature;
  ms.use_q = spec.use_q;
  ms.nonlinearity = spec.nonlinearity;
  ms.two_layer = spec.two_layer;
  ms.trainable_heads = spec.trainable_heads;
  ms.init_scale = 0.5;
  probes::ProbeModel model = probes::init_model(ms, rng());
  if (model.heads && model.heads->trainable) {
    // Move the poles off their symmetric start so the head gradient is generic.
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (auto* v : {&model.heads->pos, &model.heads->neg})
      for (Eigen::Index i = 0; i < v->size(); ++i) (*v)(i) += u(rng);
  }

  std::vector<data::SyntaxExample> syntax;
  std::vector<data::SentimentExample> sentiment;
  for (int s = 0; s < options.sentences; ++s) {
    const int t = std::uniform_int_distribution<int>(3, 6)(rng);
    Eigen::MatrixXd emb = gaussian(t, options.input_dim, rng);
    if (spec.task == Task::sentiment) {
      data::SentimentExample ex;
      for (int i = 0; i < t; ++i) ex.tokens.push_back("w" + std::to_string(i));
      ex.embedding = std::move(emb);
      ex.label = (rng() & 1) ? data::Label::positive : data::Label::negative;
      sentiment.push_back(std::move(ex));
    } else {
      data::SyntaxExample ex;
      for (int i = 0; i < t; ++i) ex.record.tokens.push_back("w" + std::to_string(i));
      ex.record.head = random_tree(t, rng);
      ex.record.upos.assign(t, "X");
      ex.record.xpos.assign(t, "X");
      ex.record.deprel.assign(t, "dep");
      ex.record.embedding = std::move(emb);
      ex.gold = data::tree_metrics(ex.record);
      syntax.push_back(std::move(ex));
    }
  }
  std::vector<const data::SyntaxExample*> syntax_ptrs;
  for (const auto& ex : syntax) syntax_ptrs.push_back(&ex);
  std::vector<const data::SentimentExample*> sentiment_ptrs;
  for (const auto& ex : sentiment) sentiment_ptrs.push_back(&ex);

  auto evaluate = [&](const probes::ProbeModel& m) {
    return spec.task == Task::sentiment ? probes::sentiment_loss(m, sentiment_ptrs)
                                        : probes::syntax_loss(m, syntax_ptrs);
  };

  const std::vector<double> params = probes::flatten_trainable(model);
  std::vector<double> analytic = probes::flatten_trainable(evaluate(model).grad);
  if (options.corrupt) options.corrupt(analytic);

  probes::ProbeModel scratch = model;
  const optim::GradCheckResult r = optim::finite_difference_check(
      [&](std::span<const double> values) {
        probes::unflatten_trainable(scratch, values);
        return evaluate(scratch).loss;
      },
      params, analytic, options.step);

  CaseResult out;
  out.spec = spec;
  out.max_rel_error = r.max_rel_error;
  out.parameter_count = params.size();
  out.passed = r.max_rel_error < options.tolerance;
  std::size_t offset = 0;
  for (const auto& ref : probes::parameters(model)) {
    if (!ref.trainable) continue;
    if (r.worst_index < offset + ref.values.size()) {
      out.worst_param = ref.name;
      out.worst_offset = r.worst_index - offset;
      break;
    }
    offset += ref.values.size();
  }
  return out;
}

Report run(const std::vector<Case>& cases, const Options& options) {
  Report report;
  for (const Case& c : cases) {
    report.cases.push_back(run_case(c, options));
    report.max_rel_error = std::max(report.max_rel_error, report.cases.back().max_rel_error);
    report.passed = report.passed && report.cases.back().passed;
  }
  return report;
}

}  // namespace hyperprobe::gradcheck
