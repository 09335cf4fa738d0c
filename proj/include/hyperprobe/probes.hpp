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

/** Structural probes over frozen embeddings.
 *
 * A Poincare probe maps h to q = Q (x)_c exp_0(P h); a Euclidean probe maps h
 * to B1 h, or B2 sigma(B1 h) with the optional second layer. Squared
 * distances between probed tokens are fit to tree distances, squared
 * distances to the origin to tree depths, and the sentiment variant scores a
 * sentence by summed distances to two pole points ("meta-embeddings").
 *
 * Every loss returns its value together with an analytic gradient in the same
 * shape as the model. */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hyperprobe/data.hpp"
#include "hyperprobe/geometry.hpp"

namespace hyperprobe::probes {

using geometry::Matrix;
using geometry::Vector;

enum class Geometry { euclidean, poincare };
enum class Nonlinearity { none, relu, sigmoid, tanh };
enum class Task { distance, depth, joint, sentiment };

const char* to_string(Geometry g);
const char* to_string(Nonlinearity n);
const char* to_string(Task t);
Geometry parse_geometry(const std::string& s);
Nonlinearity parse_nonlinearity(const std::string& s);
Task parse_task(const std::string& s);

/// P is stored k x n (it maps R^n to R^k), Q is k x k.
struct PoincareProbeParams {
  Matrix P;
  Matrix Q;
  geometry::Ball ball{1.0};
  bool use_q = true;
};

/// B1 is k x n; B2 (k x k) is present for the two-layer variants.
struct EuclideanProbeParams {
  Matrix B1;
  std::optional<Matrix> B2;
  Nonlinearity nonlinearity = Nonlinearity::none;
};

using ProbeParams = std::variant<PoincareProbeParams, EuclideanProbeParams>;

/// Sentiment poles. Ball points for the Poincare probe, plain vectors for the
/// Euclidean one.
struct SentimentHeads {
  Vector pos;
  Vector neg;
  bool trainable = false;
};

struct ProbeModel {
  Task task = Task::distance;
  ProbeParams probe;
  std::optional<SentimentHeads> heads;

  Geometry geometry() const;
  Eigen::Index rank() const;
  Eigen::Index input_dim() const;
};

struct ModelSpec {
  Task task = Task::distance;
  Geometry geometry = Geometry::poincare;
  Eigen::Index input_dim = 0;
  Eigen::Index rank = 64;
  double curvature = 1.0;
  double ball_eps = geometry::kDefaultBallEps;
  double atanh_eps = geometry::kDefaultAtanhEps;
  bool use_q = true;
  Nonlinearity nonlinearity = Nonlinearity::none;
  bool two_layer = false;
  bool trainable_heads = true;
  double init_scale = 0.05;
};

/// Entries uniform in [-init_scale, init_scale]; heads start at the fixed poles.
ProbeModel init_model(const ModelSpec& spec, std::uint64_t seed);

/// Fixed pole positions: exp_0(1/sqrt(k) * 1) (or 1/sqrt(k) * 1) and its negation.
SentimentHeads fixed_heads(Geometry geometry, Eigen::Index rank, const geometry::Ball& ball,
                           bool trainable);

// ---- parameter registry ---------------------------------------------------

enum class Manifold { euclidean, poincare_ball };

struct ParamRef {
  std::string name;
  std::span<double> values;
  Manifold manifold;
  bool trainable;
};

/// Every parameter of the model in a fixed order. Unused blocks (Q when the
/// probe bypasses it) are omitted; frozen heads are listed with trainable=false.
std::vector<ParamRef> parameters(ProbeModel& model);

/// Same-shaped model with all parameters zero.
ProbeModel zeros_like(const ProbeModel& model);
void add_scaled(ProbeModel& acc, const ProbeModel& grad, double weight);
/// Concatenation of the trainable parameters in registry order.
std::vector<double> flatten_trainable(const ProbeModel& model);
void unflatten_trainable(ProbeModel& model, std::span<const double> values);

// ---- forward --------------------------------------------------------------

/// Probed coordinates for one embedding row (Poincare: a ball point).
geometry::BallPoint project(const Vector& h, const PoincareProbeParams& params);
/// Rows of the result are the probed tokens of the t x n embedding matrix.
Matrix project_sentence(const ProbeParams& params, const Matrix& embedding);
/// Parameter gradient given d(loss)/d(probed rows).
ProbeParams project_backward(const ProbeParams& params, const Matrix& embedding,
                             const Matrix& grad_rows);

/// Squared probe distance between two probed rows.
double squared_distance(const ProbeParams& params, const Vector& a, const Vector& b);
/// Squared probe distance of a probed row to the origin ("predicted depth").
double squared_norm(const ProbeParams& params, const Vector& a);

/// All pairwise squared distances of a sentence (t x t).
Matrix predicted_distances(const ProbeParams& params, const Matrix& embedding);
/// Squared distance to the origin per token.
Vector predicted_depths(const ProbeParams& params, const Matrix& embedding);

// ---- losses ---------------------------------------------------------------

struct LossAndGrad {
  double loss = 0.0;
  ProbeModel grad;
};

/// Per-sentence losses; `grad`, when given, receives the gradient scaled by
/// `weight` added in place.
double sentence_distance_loss(const ProbeModel& model, const data::SyntaxExample& ex,
                              ProbeModel* grad = nullptr, double weight = 1.0);
double sentence_depth_loss(const ProbeModel& model, const data::SyntaxExample& ex,
                           ProbeModel* grad = nullptr, double weight = 1.0);
double sentence_sentiment_loss(const ProbeModel& model, const data::SentimentExample& ex,
                               ProbeModel* grad = nullptr, double weight = 1.0);

/// Batch means of the per-sentence losses. Distance skips sentences with t < 2.
LossAndGrad distance_loss(const ProbeModel& model,
                          std::span<const data::SyntaxExample* const> batch, unsigned threads = 1);
LossAndGrad depth_loss(const ProbeModel& model, std::span<const data::SyntaxExample* const> batch,
                       unsigned threads = 1);
/// distance_loss + depth_loss with a 1:1 weighting.
LossAndGrad joint_loss(const ProbeModel& model, std::span<const data::SyntaxExample* const> batch,
                       unsigned threads = 1);
LossAndGrad sentiment_loss(const ProbeModel& model,
                           std::span<const data::SentimentExample* const> batch,
                           unsigned threads = 1);
/// Dispatches on model.task for syntax tasks.
LossAndGrad syntax_loss(const ProbeModel& model, std::span<const data::SyntaxExample* const> batch,
                        unsigned threads = 1);

// ---- sentiment ------------------------------------------------------------

struct Logits {
  double pos = 0.0;
  double neg = 0.0;
  /// Exact ties go to negative.
  data::Label predicted() const {
    return pos > neg ? data::Label::positive : data::Label::negative;
  }
};

/// l_pos sums distances to the negative pole, l_neg distances to the positive one.
Logits sentiment_logits(const ProbeModel& model, const Matrix& embedding);

/// Distance from one probed row to each pole: (to positive, to negative).
std::pair<double, double> pole_distances(const ProbeModel& model, const Vector& probed);

struct WordScore {
  std::string word;
  double gap = 0.0;
  std::size_t count = 0;
};

/// Mean of d(q, c_neg) - d(q, c_pos) per word type, most positive first, ties
/// broken by the word itself. Subword pieces ("##...") and numerals are skipped.
std::vector<WordScore> rank_word_sentiment(const ProbeModel& model,
                                           std::span<const data::SentimentExample> corpus);

}  // namespace hyperprobe::probes
