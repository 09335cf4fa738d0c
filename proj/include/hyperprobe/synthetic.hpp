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

/** Generated corpora with a known answer.
 *
 * The syntax corpus hides a tree in every sentence: ball points q* are fit so
 * that squared distances match the tree distances, and the embeddings are
 * h = A log_0(q*) for one fixed full-rank A. A Poincare probe with P = A^+
 * and Q = I reproduces q* exactly.
 *
 * The sentiment corpus plants a single polarity token per sentence, shifted
 * along a fixed direction with the sign of the label. */

#pragma once

#include <cstdint>
#include <vector>

#include "hyperprobe/data.hpp"
#include "hyperprobe/geometry.hpp"

namespace hyperprobe::synthetic {

struct FitOptions {
  double target_loss = 0.01;
  int max_steps = 20000;
  double lr = 0.05;
  std::uint64_t seed = 0;
};

struct FitResult {
  Eigen::MatrixXd points;  ///< t x k, one ball point per row
  double loss = 0.0;
  int steps = 0;
};

/// Riemannian Adam on the points of one tree, minimizing
/// (1/t^2) sum_ij |d_T(i,j) - d(q_i, q_j)^2|.
FitResult fit_tree_points(const data::TreeGold& gold, Eigen::Index rank, const geometry::Ball& ball,
                          const FitOptions& options = {});

struct SyntaxOptions {
  std::size_t sentences = 200;
  int min_length = 5;
  int max_length = 15;
  Eigen::Index input_dim = 128;
  Eigen::Index rank = 16;
  double curvature = 1.0;
  FitOptions fit;
  std::uint64_t seed = 0;        ///< sentence sampling
  std::uint64_t world_seed = 0;  ///< A; splits sharing it share one generator
};

struct SyntaxCorpus {
  std::vector<data::SyntaxExample> examples;
  Eigen::MatrixXd mixing;  ///< A, input_dim x rank
  std::vector<Eigen::MatrixXd> targets;  ///< q* per sentence
  std::vector<double> fit_losses;
  std::size_t rejected = 0;  ///< trees refit from scratch after missing the target
};

SyntaxCorpus make_syntax_corpus(const SyntaxOptions& options = {});

struct SentimentOptions {
  std::size_t sentences = 400;
  int min_length = 4;
  int max_length = 12;
  Eigen::Index input_dim = 32;
  double signal = 4.0;
  double noise = 1.0;
  std::size_t vocabulary = 60;
  std::uint64_t seed = 0;        ///< sentence sampling
  std::uint64_t world_seed = 0;  ///< direction and word vectors
};

/// Labels alternate so the corpus is balanced; planted words are "good<i>" or
/// "bad<i>", filler words "w<i>".
std::vector<data::SentimentExample> make_sentiment_corpus(const SentimentOptions& options = {});

}  // namespace hyperprobe::synthetic
