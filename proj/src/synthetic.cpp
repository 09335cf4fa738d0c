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

#include "hyperprobe/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "hyperprobe/error.hpp"
#include "hyperprobe/optim.hpp"

namespace hyperprobe::synthetic {

namespace kernel = geometry::kernel;
using Eigen::MatrixXd;
using Eigen::VectorXd;

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

MatrixXd gaussian(Eigen::Index r, Eigen::Index c, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, scale);
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

double tree_loss(const data::TreeGold& gold, const MatrixXd& q, const geometry::Ball& ball,
                 MatrixXd* grad) {
  const Eigen::Index t = q.rows();
  const double w = 1.0 / static_cast<double>(t * t);
  double loss = 0.0;
  if (grad) grad->setZero(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = i + 1; j < t; ++j) {
      const VectorXd qi = q.row(i).transpose(), qj = q.row(j).transpose();
      const auto pg = kernel::squared_distance_grad(qi, qj, ball);
      const double r = pg.value - gold.dist(i, j);
      loss += 2.0 * w * std::abs(r);
      if (grad && r != 0.0) {
        const double s = 2.0 * w * (r > 0 ? 1.0 : -1.0);
        grad->row(i) += s * pg.d_x.transpose();
        grad->row(j) += s * pg.d_y.transpose();
      }
    }
  }
  return loss;
}

}  // namespace

FitResult fit_tree_points(const data::TreeGold& gold, Eigen::Index rank, const geometry::Ball& ball,
                          const FitOptions& options) {
  const Eigen::Index t = gold.dist.rows();
  std::mt19937_64 rng(options.seed);
  FitResult out;
  out.points = gaussian(t, rank, 0.1 / std::sqrt(static_cast<double>(rank) * ball.c.value()), rng);
  if (t < 2) return out;

  std::vector<optim::RiemannianAdamState> states(
      static_cast<std::size_t>(t), optim::RiemannianAdamState::fresh(rank, {.lr = options.lr}));
  MatrixXd grad;
  MatrixXd best = out.points;
  double best_loss = tree_loss(gold, out.points, ball, nullptr);
  int since_best = 0;
  double lr = options.lr;
  for (int step = 1; step <= options.max_steps && best_loss >= options.target_loss; ++step) {
    tree_loss(gold, out.points, ball, &grad);
    for (Eigen::Index i = 0; i < t; ++i) {
      VectorXd p = out.points.row(i).transpose();
      const VectorXd g = grad.row(i).transpose();
      optim::riemannian_adam_step({p.data(), static_cast<std::size_t>(rank)},
                                  {g.data(), static_cast<std::size_t>(rank)}, ball,
                                  states[static_cast<std::size_t>(i)]);
      out.points.row(i) = p.transpose();
    }
    const double loss = tree_loss(gold, out.points, ball, nullptr);
    out.steps = step;
    if (loss < best_loss) {
      best_loss = loss;
      best = out.points;
      since_best = 0;
    } else if (++since_best >= 200) {
      // The absolute-value loss makes Adam hover; shrink the step to settle.
      lr *= 0.5;
      for (auto& s : states) s.hyper.lr = lr;
      since_best = 0;
    }
  }
  out.points = best;
  out.loss = best_loss;
  return out;
}

SyntaxCorpus make_syntax_corpus(const SyntaxOptions& options) {
  if (options.min_length < 2 || options.max_length < options.min_length) {
    throw UsageError("synthetic sentence lengths must satisfy 2 <= min <= max");
  }
  if (options.rank <= 0 || options.input_dim < options.rank) {
    throw UsageError("synthetic input dimension must be at least the rank");
  }
  const geometry::Ball ball(options.curvature);
  std::mt19937_64 world(options.world_seed);
  std::mt19937_64 rng(options.seed);
  SyntaxCorpus corpus;
  // Columns scaled so |A v| is comparable to |v|.
  corpus.mixing = gaussian(options.input_dim, options.rank,
                           1.0 / std::sqrt(static_cast<double>(options.input_dim)), world);

  while (corpus.examples.size() < options.sentences) {
    const int t = std::uniform_int_distribution<int>(options.min_length, options.max_length)(rng);
    data::SyntaxExample ex;
    ex.record.head = random_tree(t, rng);
    for (int i = 0; i < t; ++i) {
      ex.record.tokens.push_back("w" + std::to_string(i + 1));
      ex.record.upos.push_back("X");
      ex.record.xpos.push_back("X");
      ex.record.deprel.push_back(ex.record.head[i] == 0 ? "root" : "dep");
    }
    ex.gold = data::tree_metrics(ex.record);
    FitOptions fit = options.fit;
    fit.seed = rng();
    const FitResult r = fit_tree_points(ex.gold, options.rank, ball, fit);
    if (r.loss >= options.fit.target_loss) {
      ++corpus.rejected;
      continue;
    }
    MatrixXd tangent(t, options.rank);
    for (int i = 0; i < t; ++i) tangent.row(i) = kernel::log0(r.points.row(i).transpose(), ball).transpose();
    ex.record.embedding = tangent * corpus.mixing.transpose();
    corpus.targets.push_back(r.points);
    corpus.fit_losses.push_back(r.loss);
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

std::vector<data::SentimentExample> make_sentiment_corpus(const SentimentOptions& options) {
  if (options.min_length < 1 || options.max_length < options.min_length || options.input_dim < 1 ||
      options.vocabulary < 1) {
    throw UsageError("invalid synthetic sentiment options");
  }
  std::mt19937_64 world(options.world_seed);
  std::mt19937_64 rng(options.seed);
  const Eigen::Index n = options.input_dim;
  VectorXd direction = gaussian(n, 1, 1.0, world).col(0);
  direction.normalize();
  // One fixed vector per filler word, so word identity is consistent.
  const MatrixXd filler = gaussian(static_cast<Eigen::Index>(options.vocabulary), n,
                                   options.noise / std::sqrt(static_cast<double>(n)), world);
  const std::size_t planted_words = 5;
  const MatrixXd planted = gaussian(static_cast<Eigen::Index>(planted_words), n,
                                    0.1 * options.noise / std::sqrt(static_cast<double>(n)), world);

  std::vector<data::SentimentExample> out;
  for (std::size_t s = 0; s < options.sentences; ++s) {
    const bool positive = s % 2 == 0;
    const int t = std::uniform_int_distribution<int>(options.min_length, options.max_length)(rng);
    const int slot = std::uniform_int_distribution<int>(0, t - 1)(rng);
    data::SentimentExample ex;
    ex.label = positive ? data::Label::positive : data::Label::negative;
    ex.embedding.resize(t, n);
    for (int i = 0; i < t; ++i) {
      if (i == slot) {
        const auto w = static_cast<Eigen::Index>(rng() % planted_words);
        ex.tokens.push_back((positive ? "good" : "bad") + std::to_string(w));
        ex.embedding.row(i) = planted.row(w) + (positive ? 1.0 : -1.0) * options.signal * direction.transpose();
      } else {
        const auto w = static_cast<Eigen::Index>(rng() % options.vocabulary);
        ex.tokens.push_back("w" + std::to_string(w));
        ex.embedding.row(i) = filler.row(w);
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace hyperprobe::synthetic
