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

/** Minibatch training with epoch-level learning-rate decay and dev-loss model
 * selection.
 *
 * Matrices are updated with Adam and ball-valued parameters (the trainable
 * sentiment poles of a Poincare probe) with Riemannian Adam; the routing
 * follows the manifold tag of each entry in probes::parameters(). */

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hyperprobe/data.hpp"
#include "hyperprobe/optim.hpp"
#include "hyperprobe/probes.hpp"

namespace hyperprobe::train {

struct TrainConfig {
  probes::Task task = probes::Task::distance;
  probes::Geometry geometry = probes::Geometry::poincare;
  Eigen::Index rank = 64;
  double curvature = 1.0;
  double lr = 1e-3;
  int max_epochs = 40;
  std::size_t batch_size = 20;
  std::uint64_t seed = 0;
  double decay_factor = 0.1;
  int patience = 1;
  double min_lr = 1e-6;

  probes::Nonlinearity nonlinearity = probes::Nonlinearity::none;
  bool two_layer = false;
  bool use_q = true;
  bool trainable_heads = true;
  double init_scale = 0.05;
  double ball_eps = geometry::kDefaultBallEps;
  double atanh_eps = geometry::kDefaultAtanhEps;
  unsigned threads = 1;

  /// Throws UsageError on non-positive sizes or rates, or a task that does
  /// not match the corpus kind being trained.
  void validate() const;
  probes::ModelSpec model_spec(Eigen::Index input_dim) const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
};

/// Optimizer state for one registry entry.
struct OptimizerSlot {
  std::string name;
  probes::Manifold manifold = probes::Manifold::euclidean;
  std::variant<optim::AdamState, optim::RiemannianAdamState> state;

  const optim::AdamState& adam() const;
};

struct TrainResult {
  probes::ProbeModel model;  ///< best by dev loss
  std::vector<OptimizerSlot> optimizer;  ///< state when the best model was taken
  std::vector<EpochRecord> log;
  int best_epoch = 0;  ///< 0 when no epoch finished with a finite dev loss
  double best_dev_loss = 0.0;
  double final_lr = 0.0;
  bool diverged = false;
  std::string stop_reason;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Index batches for one epoch: a seeded shuffle of 0..n-1 cut into chunks.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t seed);

/// Slots for every trainable parameter, in registry order.
std::vector<OptimizerSlot> make_optimizer(probes::ProbeModel& model, double lr);
/// One update of every trainable parameter from a same-shaped gradient.
void apply_gradient(probes::ProbeModel& model, const probes::ProbeModel& grad,
                    std::vector<OptimizerSlot>& slots);

TrainResult train_syntax(const TrainConfig& config, std::span<const data::SyntaxExample> train,
                         std::span<const data::SyntaxExample> dev,
                         const EpochCallback& on_epoch = {});
TrainResult train_sentiment(const TrainConfig& config,
                            std::span<const data::SentimentExample> train,
                            std::span<const data::SentimentExample> dev,
                            const EpochCallback& on_epoch = {});

/// Tab-separated "epoch train_loss dev_loss lr wall_seconds" lines after a
/// '#' header. Losses and rates are written with round-trip precision.
void write_log(std::ostream& out, const std::vector<EpochRecord>& log, bool include_wall = true);
std::vector<EpochRecord> read_log(std::istream& in);

}  // namespace hyperprobe::train
