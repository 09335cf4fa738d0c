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

#include "hyperprobe/probes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <map>
#include <random>

#include "hyperprobe/error.hpp"
#include "hyperprobe/parallel.hpp"

namespace hyperprobe::probes {

namespace kernel = geometry::kernel;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double activate(Nonlinearity nl, double z) {
  switch (nl) {
    case Nonlinearity::none: return z;
    case Nonlinearity::relu: return z > 0.0 ? z : 0.0;
    case Nonlinearity::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Nonlinearity::tanh: return std::tanh(z);
  }
  return z;
}

double activate_grad(Nonlinearity nl, double z) {
  switch (nl) {
    case Nonlinearity::none: return 1.0;
    case Nonlinearity::relu: return z > 0.0 ? 1.0 : 0.0;
    case Nonlinearity::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Nonlinearity::tanh: {
      const double th = std::tanh(z);
      return 1.0 - th * th;
    }
  }
  return 1.0;
}

double sign(double r) { return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0); }

void check_input(const ProbeParams& params, const Matrix& embedding) {
  const auto n = std::visit(overloaded{[](const PoincareProbeParams& p) { return p.P.cols(); },
                                       [](const EuclideanProbeParams& p) { return p.B1.cols(); }},
                            params);
  if (embedding.cols() != n) {
    throw UsageError("probe expects " + std::to_string(n) + "-dimensional embeddings, got " +
                     std::to_string(embedding.cols()));
  }
}

const geometry::Ball* ball_of(const ProbeParams& params) {
  if (const auto* p = std::get_if<PoincareProbeParams>(&params)) return &p->ball;
  return nullptr;
}

// Squared probe distance and its gradient in both arguments.
geometry::kernel::PairGradient squared_pair(const ProbeParams& params, const Vector& a,
                                            const Vector& b) {
  if (const auto* ball = ball_of(params)) return kernel::squared_distance_grad(a, b, *ball);
  const Vector diff = a - b;
  return {diff.squaredNorm(), 2.0 * diff, -2.0 * diff};
}

// Unsquared distance to a pole and its gradient; the subgradient at the pole is zero.
geometry::kernel::PairGradient pole_pair(const ProbeParams& params, const Vector& a,
                                         const Vector& pole) {
  if (const auto* ball = ball_of(params)) return kernel::distance_grad(a, pole, *ball);
  const Vector diff = a - pole;
  const double d = diff.norm();
  if (d == 0.0) return {0.0, Vector::Zero(a.size()), Vector::Zero(a.size())};
  return {d, diff / d, -diff / d};
}

void add_probe_scaled(ProbeParams& acc, const ProbeParams& g, double w) {
  std::visit(overloaded{[&](PoincareProbeParams& a) {
                          const auto& b = std::get<PoincareProbeParams>(g);
                          a.P += w * b.P;
                          a.Q += w * b.Q;
                        },
                        [&](EuclideanProbeParams& a) {
                          const auto& b = std::get<EuclideanProbeParams>(g);
                          a.B1 += w * b.B1;
                          if (a.B2) *a.B2 += w * *b.B2;
                        }},
             acc);
}

bool is_numeral(const std::string& w) {
  bool digit = false;
  for (unsigned char ch : w) {
    if (std::isdigit(ch)) {
      digit = true;
    } else if (!std::strchr(".,-+/:%", ch)) {
      return false;
    }
  }
  return digit;
}

template <typename Example, typename Rows, typename PerSentence>
LossAndGrad batch_mean(const ProbeModel& model, std::span<const Example* const> batch,
                       unsigned threads, Eigen::Index min_tokens, Rows rows,
                       PerSentence per_sentence) {
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (rows(*batch[i]) >= min_tokens) used.push_back(i);
  }
  LossAndGrad out{0.0, zeros_like(model)};
  if (used.empty()) return out;
  std::vector<double> losses(used.size());
  std::vector<ProbeModel> grads(used.size());
  parallel_for(used.size(), threads, [&](std::size_t k) {
    grads[k] = zeros_like(model);
    losses[k] = per_sentence(model, *batch[used[k]], &grads[k]);
  });
  // Fixed index-order reduction keeps results independent of the thread count.
  const double w = 1.0 / static_cast<double>(used.size());
  for (std::size_t k = 0; k < used.size(); ++k) {
    out.loss += w * losses[k];
    add_scaled(out.grad, grads[k], w);
  }
  return out;
}

Eigen::Index syntax_rows(const data::SyntaxExample& ex) { return ex.record.embedding.rows(); }

}  // namespace

const char* to_string(Geometry g) { return g == Geometry::poincare ? "poincare" : "euclidean"; }

const char* to_string(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::none: return "none";
    case Nonlinearity::relu: return "relu";
    case Nonlinearity::sigmoid: return "sigmoid";
    case Nonlinearity::tanh: return "tanh";
  }
  return "none";
}

const char* to_string(Task t) {
  switch (t) {
    case Task::distance: return "distance";
    case Task::depth: return "depth";
    case Task::joint: return "joint";
    case Task::sentiment: return "sentiment";
  }
  return "distance";
}

Geometry parse_geometry(const std::string& s) {
  if (s == "poincare") return Geometry::poincare;
  if (s == "euclidean") return Geometry::euclidean;
  throw UsageError("unknown geometry '" + s + "' (expected euclidean|poincare)");
}

Nonlinearity parse_nonlinearity(const std::string& s) {
  if (s == "none") return Nonlinearity::none;
  if (s == "relu") return Nonlinearity::relu;
  if (s == "sigmoid") return Nonlinearity::sigmoid;
  if (s == "tanh") return Nonlinearity::tanh;
  throw UsageError("unknown nonlinearity '" + s + "' (expected none|relu|sigmoid|tanh)");
}

Task parse_task(const std::string& s) {
  if (s == "distance") return Task::distance;
  if (s == "depth") return Task::depth;
  if (s == "joint") return Task::joint;
  if (s == "sentiment") return Task::sentiment;
  throw UsageError("unknown task '" + s + "' (expected distance|depth|joint|sentiment)");
}

Geometry ProbeModel::geometry() const {
  return std::holds_alternative<PoincareProbeParams>(probe) ? Geometry::poincare
                                                            : Geometry::euclidean;
}

Eigen::Index ProbeModel::rank() const {
  return std::visit(overloaded{[](const PoincareProbeParams& p) { return p.P.rows(); },
                               [](const EuclideanProbeParams& p) { return p.B1.rows(); }},
                    probe);
}

Eigen::Index ProbeModel::input_dim() const {
  return std::visit(overloaded{[](const PoincareProbeParams& p) { return p.P.cols(); },
                               [](const EuclideanProbeParams& p) { return p.B1.cols(); }},
                    probe);
}

SentimentHeads fixed_heads(Geometry geometry, Eigen::Index rank, const geometry::Ball& ball,
                           bool trainable) {
  const Vector base = Vector::Constant(rank, 1.0 / std::sqrt(static_cast<double>(rank)));
  SentimentHeads heads;
  heads.pos = geometry == Geometry::poincare ? kernel::exp0(base, ball) : base;
  heads.neg = -heads.pos;
  heads.trainable = trainable;
  return heads;
}

ProbeModel init_model(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.input_dim <= 0 || spec.rank <= 0) throw UsageError("probe dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-spec.init_scale, spec.init_scale);
  auto random = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = unif(rng);
    return m;
  };
  const geometry::Ball ball(spec.curvature, spec.ball_eps, spec.atanh_eps);

  ProbeModel model;
  model.task = spec.task;
  if (spec.geometry == Geometry::poincare) {
    PoincareProbeParams p;
    p.P = random(spec.rank, spec.input_dim);
    p.Q = random(spec.rank, spec.rank);
    p.ball = ball;
    p.use_q = spec.use_q;
    model.probe = std::move(p);
  } else {
    EuclideanProbeParams p;
    p.B1 = random(spec.rank, spec.input_dim);
    p.nonlinearity = spec.nonlinearity;
    if (spec.two_layer || spec.nonlinearity != Nonlinearity::none) {
      p.B2 = random(spec.rank, spec.rank);
    }
    model.probe = std::move(p);
  }
  if (spec.task == Task::sentiment) {
    model.heads = fixed_heads(spec.geometry, spec.rank, ball, spec.trainable_heads);
  }
  return model;
}

std::vector<ParamRef> parameters(ProbeModel& model) {
  std::vector<ParamRef> refs;
  auto span_of = [](auto& m) { return std::span<double>(m.data(), static_cast<std::size_t>(m.size())); };
  std::visit(overloaded{[&](PoincareProbeParams& p) {
                          refs.push_back({"P", span_of(p.P), Manifold::euclidean, true});
                          if (p.use_q) refs.push_back({"Q", span_of(p.Q), Manifold::euclidean, true});
                        },
                        [&](EuclideanProbeParams& p) {
                          refs.push_back({"B1", span_of(p.B1), Manifold::euclidean, true});
                          if (p.B2) refs.push_back({"B2", span_of(*p.B2), Manifold::euclidean, true});
                        }},
             model.probe);
  if (model.heads) {
    const Manifold m =
        model.geometry() == Geometry::poincare ? Manifold::poincare_ball : Manifold::euclidean;
    refs.push_back({"c_pos", span_of(model.heads->pos), m, model.heads->trainable});
    refs.push_back({"c_neg", span_of(model.heads->neg), m, model.heads->trainable});
  }
  return refs;
}

ProbeModel zeros_like(const ProbeModel& model) {
  ProbeModel z = model;
  for (auto& ref : parameters(z)) std::fill(ref.values.begin(), ref.values.end(), 0.0);
  std::visit(overloaded{[](PoincareProbeParams& p) { p.Q.setZero(); }, [](EuclideanProbeParams&) {}},
             z.probe);
  return z;
}

void add_scaled(ProbeModel& acc, const ProbeModel& grad, double weight) {
  add_probe_scaled(acc.probe, grad.probe, weight);
  if (acc.heads && grad.heads) {
    acc.heads->pos += weight * grad.heads->pos;
    acc.heads->neg += weight * grad.heads->neg;
  }
}

std::vector<double> flatten_trainable(const ProbeModel& model) {
  ProbeModel copy = model;
  std::vector<double> out;
  for (const auto& ref : parameters(copy)) {
    if (ref.trainable) out.insert(out.end(), ref.values.begin(), ref.values.end());
  }
  return out;
}

void unflatten_trainable(ProbeModel& model, std::span<const double> values) {
  std::size_t offset = 0;
  for (auto& ref : parameters(model)) {
    if (!ref.trainable) continue;
    if (offset + ref.values.size() > values.size()) {
      throw UsageError("unflatten_trainable: too few values");
    }
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), ref.values.size(),
                ref.values.begin());
    offset += ref.values.size();
  }
  if (offset != values.size()) throw UsageError("unflatten_trainable: too many values");
}

geometry::BallPoint project(const Vector& h, const PoincareProbeParams& params) {
  if (h.size() != params.P.cols()) throw UsageError("project: embedding dimension mismatch");
  if (!h.allFinite()) throw DataError("project: non-finite embedding");
  const Vector p = kernel::exp0(params.P * h, params.ball);
  const Vector q = params.use_q ? kernel::mobius_matvec(params.Q, p, params.ball) : p;
  return geometry::project_to_ball(q, params.ball);
}

Matrix project_sentence(const ProbeParams& params, const Matrix& embedding) {
  check_input(params, embedding);
  return std::visit(
      overloaded{
          [&](const PoincareProbeParams& p) {
            const Matrix u = embedding * p.P.transpose();
            Matrix out(u.rows(), u.cols());
            for (Eigen::Index i = 0; i < u.rows(); ++i) {
              const Vector pi = kernel::exp0(u.row(i).transpose(), p.ball);
              out.row(i) = (p.use_q ? kernel::mobius_matvec(p.Q, pi, p.ball) : pi).transpose();
            }
            return out;
          },
          [&](const EuclideanProbeParams& p) {
            Matrix z = embedding * p.B1.transpose();
            if (!p.B2) return z;
            const Matrix a = z.unaryExpr([&](double v) { return activate(p.nonlinearity, v); });
            return Matrix(a * p.B2->transpose());
          }},
      params);
}

ProbeParams project_backward(const ProbeParams& params, const Matrix& embedding,
                             const Matrix& grad_rows) {
  check_input(params, embedding);
  return std::visit(
      overloaded{
          [&](const PoincareProbeParams& p) -> ProbeParams {
            PoincareProbeParams g = p;
            g.P.setZero();
            g.Q.setZero();
            const Matrix u = embedding * p.P.transpose();
            Matrix du(u.rows(), u.cols());
            for (Eigen::Index i = 0; i < u.rows(); ++i) {
              const Vector ui = u.row(i).transpose();
              Vector dp = grad_rows.row(i).transpose();
              if (p.use_q) {
                const Vector pi = kernel::exp0(ui, p.ball);
                auto vjp = kernel::mobius_matvec_vjp(p.Q, pi, dp, p.ball);
                g.Q += vjp.d_matrix;
                dp = std::move(vjp.d_point);
              }
              du.row(i) = kernel::exp0_vjp(ui, dp, p.ball).transpose();
            }
            g.P = du.transpose() * embedding;
            return g;
          },
          [&](const EuclideanProbeParams& p) -> ProbeParams {
            EuclideanProbeParams g = p;
            if (!p.B2) {
              g.B1 = grad_rows.transpose() * embedding;
              return g;
            }
            const Matrix z = embedding * p.B1.transpose();
            const Matrix a = z.unaryExpr([&](double v) { return activate(p.nonlinearity, v); });
            g.B2 = grad_rows.transpose() * a;
            const Matrix da = grad_rows * *p.B2;
            const Matrix dz = da.cwiseProduct(
                z.unaryExpr([&](double v) { return activate_grad(p.nonlinearity, v); }));
            g.B1 = dz.transpose() * embedding;
            return g;
          }},
      params);
}

double squared_distance(const ProbeParams& params, const Vector& a, const Vector& b) {
  if (const auto* ball = ball_of(params)) {
    const double d = kernel::distance(a, b, *ball);
    return d * d;
  }
  return (a - b).squaredNorm();
}

double squared_norm(const ProbeParams& params, const Vector& a) {
  if (const auto* ball = ball_of(params)) {
    const double d = kernel::distance_to_origin(a, *ball);
    return d * d;
  }
  return a.squaredNorm();
}

Matrix predicted_distances(const ProbeParams& params, const Matrix& embedding) {
  const Matrix q = project_sentence(params, embedding);
  const auto t = q.rows();
  Matrix out = Matrix::Zero(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = i + 1; j < t; ++j) {
      out(i, j) = out(j, i) = squared_distance(params, q.row(i).transpose(), q.row(j).transpose());
    }
  }
  return out;
}

Vector predicted_depths(const ProbeParams& params, const Matrix& embedding) {
  const Matrix q = project_sentence(params, embedding);
  Vector out(q.rows());
  for (Eigen::Index i = 0; i < q.rows(); ++i) out(i) = squared_norm(params, q.row(i).transpose());
  return out;
}

double sentence_distance_loss(const ProbeModel& model, const data::SyntaxExample& ex,
                              ProbeModel* grad, double weight) {
  const Matrix& h = ex.record.embedding;
  const auto t = h.rows();
  if (t < 2) return 0.0;
  const Matrix q = project_sentence(model.probe, h);
  const double norm = 1.0 / static_cast<double>(t * t);
  Matrix dq = Matrix::Zero(q.rows(), q.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = i + 1; j < t; ++j) {
      // Ordered pairs (i, j) and (j, i) contribute equally; the diagonal is zero.
      const auto pair = squared_pair(model.probe, q.row(i).transpose(), q.row(j).transpose());
      const double residual = pair.value - ex.gold.dist(i, j);
      total += 2.0 * std::abs(residual);
      if (grad) {
        const double coef = 2.0 * norm * sign(residual);
        dq.row(i) += coef * pair.d_x.transpose();
        dq.row(j) += coef * pair.d_y.transpose();
      }
    }
  }
  if (grad) add_probe_scaled(grad->probe, project_backward(model.probe, h, dq), weight);
  return total * norm;
}

double sentence_depth_loss(const ProbeModel& model, const data::SyntaxExample& ex,
                           ProbeModel* grad, double weight) {
  const Matrix& h = ex.record.embedding;
  const auto t = h.rows();
  if (t < 1) return 0.0;
  const Matrix q = project_sentence(model.probe, h);
  const double norm = 1.0 / static_cast<double>(t);
  const Vector origin = Vector::Zero(q.cols());
  Matrix dq = Matrix::Zero(q.rows(), q.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < t; ++i) {
    const auto pair = squared_pair(model.probe, q.row(i).transpose(), origin);
    const double residual = pair.value - ex.gold.depth(i);
    total += std::abs(residual);
    if (grad) dq.row(i) = norm * sign(residual) * pair.d_x.transpose();
  }
  if (grad) add_probe_scaled(grad->probe, project_backward(model.probe, h, dq), weight);
  return total * norm;
}

std::pair<double, double> pole_distances(const ProbeModel& model, const Vector& probed) {
  if (!model.heads) throw UsageError("model has no sentiment poles");
  return {pole_pair(model.probe, probed, model.heads->pos).value,
          pole_pair(model.probe, probed, model.heads->neg).value};
}

Logits sentiment_logits(const ProbeModel& model, const Matrix& embedding) {
  if (!model.heads) throw UsageError("model has no sentiment poles");
  const Matrix q = project_sentence(model.probe, embedding);
  Logits l;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const auto [to_pos, to_neg] = pole_distances(model, q.row(i).transpose());
    l.pos += to_neg;
    l.neg += to_pos;
  }
  return l;
}

double sentence_sentiment_loss(const ProbeModel& model, const data::SentimentExample& ex,
                               ProbeModel* grad, double weight) {
  if (!model.heads) throw UsageError("model has no sentiment poles");
  const auto& heads = *model.heads;
  const Matrix q = project_sentence(model.probe, ex.embedding);
  const auto t = q.rows();

  Logits l;
  std::vector<geometry::kernel::PairGradient> to_pos(t), to_neg(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    to_pos[i] = pole_pair(model.probe, q.row(i).transpose(), heads.pos);
    to_neg[i] = pole_pair(model.probe, q.row(i).transpose(), heads.neg);
    l.pos += to_neg[i].value;
    l.neg += to_pos[i].value;
  }
  const double m = std::max(l.pos, l.neg);
  const double lse = m + std::log(std::exp(l.pos - m) + std::exp(l.neg - m));
  const bool positive = ex.label == data::Label::positive;
  const double loss = lse - (positive ? l.pos : l.neg);
  if (!grad) return loss;

  const double dl_pos = std::exp(l.pos - lse) - (positive ? 1.0 : 0.0);
  const double dl_neg = std::exp(l.neg - lse) - (positive ? 0.0 : 1.0);
  Matrix dq(t, q.cols());
  Vector d_pos = Vector::Zero(q.cols());
  Vector d_neg = Vector::Zero(q.cols());
  for (Eigen::Index i = 0; i < t; ++i) {
    dq.row(i) = (dl_pos * to_neg[i].d_x + dl_neg * to_pos[i].d_x).transpose();
    d_neg += dl_pos * to_neg[i].d_y;
    d_pos += dl_neg * to_pos[i].d_y;
  }
  add_probe_scaled(grad->probe, project_backward(model.probe, ex.embedding, dq), weight);
  if (heads.trainable && grad->heads) {
    grad->heads->pos += weight * d_pos;
    grad->heads->neg += weight * d_neg;
  }
  return loss;
}

LossAndGrad distance_loss(const ProbeModel& model,
                          std::span<const data::SyntaxExample* const> batch, unsigned threads) {
  return batch_mean(model, batch, threads, 2, syntax_rows,
                    [](const ProbeModel& m, const data::SyntaxExample& ex, ProbeModel* g) {
                      return sentence_distance_loss(m, ex, g);
                    });
}

LossAndGrad depth_loss(const ProbeModel& model, std::span<const data::SyntaxExample* const> batch,
                       unsigned threads) {
  return batch_mean(model, batch, threads, 1, syntax_rows,
                    [](const ProbeModel& m, const data::SyntaxExample& ex, ProbeModel* g) {
                      return sentence_depth_loss(m, ex, g);
                    });
}

LossAndGrad joint_loss(const ProbeModel& model, std::span<const data::SyntaxExample* const> batch,
                       unsigned threads) {
  LossAndGrad out = distance_loss(model, batch, threads);
  const LossAndGrad depth = depth_loss(model, batch, threads);
  out.loss += depth.loss;
  add_scaled(out.grad, depth.grad, 1.0);
  return out;
}

LossAndGrad syntax_loss(const ProbeModel& model, std::span<const data::SyntaxExample* const> batch,
                        unsigned threads) {
  switch (model.task) {
    case Task::distance: return distance_loss(model, batch, threads);
    case Task::depth: return depth_loss(model, batch, threads);
    case Task::joint: return joint_loss(model, batch, threads);
    case Task::sentiment: break;
  }
  throw UsageError("syntax_loss called on a sentiment model");
}

LossAndGrad sentiment_loss(const ProbeModel& model,
                           std::span<const data::SentimentExample* const> batch,
                           unsigned threads) {
  return batch_mean(
      model, batch, threads, 1,
      [](const data::SentimentExample& ex) { return ex.embedding.rows(); },
      [](const ProbeModel& m, const data::SentimentExample& ex, ProbeModel* g) {
        return sentence_sentiment_loss(m, ex, g);
      });
}

std::vector<WordScore> rank_word_sentiment(const ProbeModel& model,
                                           std::span<const data::SentimentExample> corpus) {
  if (corpus.empty()) throw DataError("rank_word_sentiment: empty corpus");
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& ex : corpus) {
    const Matrix q = project_sentence(model.probe, ex.embedding);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const std::string& w = ex.tokens[static_cast<std::size_t>(i)];
      if (w.starts_with("##") || is_numeral(w)) continue;
      const auto [to_pos, to_neg] = pole_distances(model, q.row(i).transpose());
      auto& slot = acc[w];
      slot.first += to_neg - to_pos;
      slot.second += 1;
    }
  }
  std::vector<WordScore> out;
  out.reserve(acc.size());
  for (const auto& [w, s] : acc) {
    out.push_back({w, s.first / static_cast<double>(s.second), s.second});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const WordScore& a, const WordScore& b) { return a.gap > b.gap; });
  return out;
}

}  // namespace hyperprobe::probes
