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

#include "hyperprobe/train.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hyperprobe/error.hpp"

namespace hyperprobe::train {

using probes::Manifold;
using probes::ProbeModel;
using probes::Task;

namespace {

std::uint64_t epoch_seed(std::uint64_t seed, int epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch)};
  std::uint64_t out = 0;
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  out = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out;
}

void set_lr(std::vector<OptimizerSlot>& slots, double lr) {
  for (auto& s : slots) std::visit([lr](auto& st) { st.hyper.lr = lr; }, s.state);
}

template <typename Example, typename LossFn>
TrainResult run(const TrainConfig& config, std::span<const Example> train,
                std::span<const Example> dev, LossFn loss_fn, const EpochCallback& on_epoch) {
  if (train.empty()) throw DataError("training corpus is empty");
  if (dev.empty()) throw DataError("dev corpus is empty");
  const Eigen::Index n = train.front().embedding_rows_cols().second;
  for (const auto& ex : train)
    if (ex.embedding_rows_cols().second != n) throw DataError("inconsistent embedding dimension");
  for (const auto& ex : dev)
    if (ex.embedding_rows_cols().second != n) throw DataError("inconsistent embedding dimension");

  ProbeModel model = probes::init_model(config.model_spec(n), config.seed);
  double lr = config.lr;
  std::vector<OptimizerSlot> slots = make_optimizer(model, lr);

  std::vector<const typename Example::Inner*> dev_ptrs;
  for (const auto& ex : dev) dev_ptrs.push_back(&ex.inner());

  TrainResult result;
  result.model = model;
  result.optimizer = slots;
  result.best_dev_loss = std::numeric_limits<double>::infinity();
  int stale = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto batches = make_batches(train.size(), config.batch_size, epoch_seed(config.seed, epoch));
    double train_sum = 0.0;
    bool finite = true;
    for (const auto& batch : batches) {
      std::vector<const typename Example::Inner*> ptrs;
      for (std::size_t i : batch) ptrs.push_back(&train[i].inner());
      probes::LossAndGrad lg = loss_fn(model, ptrs, config.threads);
      if (!std::isfinite(lg.loss)) {
        finite = false;
        break;
      }
      try {
        apply_gradient(model, lg.grad, slots);
      } catch (const NumericalError&) {
        finite = false;
        break;
      }
      train_sum += lg.loss;
    }
    const double dev_loss = finite ? loss_fn(model, dev_ptrs, config.threads).loss
                                   : std::numeric_limits<double>::quiet_NaN();
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EpochRecord rec{epoch, finite ? train_sum / static_cast<double>(batches.size()) : dev_loss,
                    dev_loss, lr, wall};
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (!std::isfinite(dev_loss)) {
      result.diverged = true;
      result.stop_reason = "non-finite loss in epoch " + std::to_string(epoch);
      break;
    }
    if (dev_loss < result.best_dev_loss) {
      result.best_dev_loss = dev_loss;
      result.best_epoch = epoch;
      result.model = model;
      result.optimizer = slots;
      stale = 0;
    } else if (++stale >= config.patience) {
      lr *= config.decay_factor;
      set_lr(slots, lr);
      stale = 0;
      if (lr < config.min_lr) {
        result.stop_reason = "learning rate fell below the minimum";
        break;
      }
    }
  }
  if (result.stop_reason.empty()) result.stop_reason = "reached max_epochs";
  if (result.best_epoch == 0) result.best_dev_loss = std::numeric_limits<double>::quiet_NaN();
  result.final_lr = lr;
  return result;
}

// Uniform view over the two corpus kinds.
struct SyntaxView {
  using Inner = data::SyntaxExample;
  const data::SyntaxExample* ex;
  const Inner& inner() const { return *ex; }
  std::pair<Eigen::Index, Eigen::Index> embedding_rows_cols() const {
    return {ex->record.embedding.rows(), ex->record.embedding.cols()};
  }
};

struct SentimentView {
  using Inner = data::SentimentExample;
  const data::SentimentExample* ex;
  const Inner& inner() const { return *ex; }
  std::pair<Eigen::Index, Eigen::Index> embedding_rows_cols() const {
    return {ex->embedding.rows(), ex->embedding.cols()};
  }
};

template <typename View, typename Example>
std::vector<View> views(std::span<const Example> corpus) {
  std::vector<View> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) out.push_back(View{&ex});
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (rank <= 0) throw UsageError("rank must be positive");
  if (!(curvature > 0.0) || !std::isfinite(curvature)) throw UsageError("curvature must be positive");
  if (!(lr > 0.0)) throw UsageError("learning rate must be positive");
  if (max_epochs <= 0) throw UsageError("max_epochs must be positive");
  if (batch_size == 0) throw UsageError("batch_size must be positive");
  if (!(decay_factor > 0.0) || decay_factor >= 1.0) throw UsageError("decay_factor must lie in (0, 1)");
  if (patience <= 0) throw UsageError("patience must be positive");
  if (!(min_lr > 0.0)) throw UsageError("min_lr must be positive");
  if (threads == 0) throw UsageError("threads must be positive");
  if (geometry == probes::Geometry::poincare &&
      (nonlinearity != probes::Nonlinearity::none || two_layer)) {
    throw UsageError("nonlinearity and two-layer options apply to the euclidean probe only");
  }
}

probes::ModelSpec TrainConfig::model_spec(Eigen::Index input_dim) const {
  probes::ModelSpec s;
  s.task = task;
  s.geometry = geometry;
  s.input_dim = input_dim;
  s.rank = rank;
  s.curvature = curvature;
  s.ball_eps = ball_eps;
  s.atanh_eps = atanh_eps;
  s.use_q = use_q;
  s.nonlinearity = nonlinearity;
  s.two_layer = two_layer;
  s.trainable_heads = trainable_heads;
  s.init_scale = init_scale;
  return s;
}

const optim::AdamState& OptimizerSlot::adam() const {
  return std::visit([](const auto& s) -> const optim::AdamState& { return s; }, state);
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t seed) {
  if (batch_size == 0) throw UsageError("batch_size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch_size) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + batch_size)));
  }
  return out;
}

std::vector<OptimizerSlot> make_optimizer(ProbeModel& model, double lr) {
  std::vector<OptimizerSlot> slots;
  const optim::AdamHyperparams hyper{.lr = lr};
  for (const auto& ref : probes::parameters(model)) {
    if (!ref.trainable) continue;
    const auto size = static_cast<Eigen::Index>(ref.values.size());
    OptimizerSlot slot{ref.name, ref.manifold, optim::AdamState::fresh(size, hyper)};
    if (ref.manifold == Manifold::poincare_ball) {
      slot.state = optim::RiemannianAdamState::fresh(size, hyper);
    }
    slots.push_back(std::move(slot));
  }
  return slots;
}

void apply_gradient(ProbeModel& model, const ProbeModel& grad, std::vector<OptimizerSlot>& slots) {
  ProbeModel g = grad;
  auto params = probes::parameters(model);
  auto grads = probes::parameters(g);
  std::size_t k = 0;
  // Validate everything first so a bad gradient leaves the model untouched.
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) {
      // Frozen parameters (fixed sentiment poles) must receive no gradient at all.
      for (double v : grads[i].values)
        if (v != 0.0) throw std::logic_error("nonzero gradient for frozen " + params[i].name);
      continue;
    }
    if (k >= slots.size() || slots[k].name != params[i].name) {
      throw UsageError("optimizer state does not match the model parameters");
    }
    for (double v : grads[i].values)
      if (!std::isfinite(v)) throw NumericalError("non-finite gradient for " + params[i].name);
    ++k;
  }
  if (k != slots.size()) throw UsageError("optimizer state does not match the model parameters");

  const geometry::Ball* ball = nullptr;
  if (const auto* p = std::get_if<probes::PoincareProbeParams>(&model.probe)) ball = &p->ball;
  k = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    OptimizerSlot& slot = slots[k++];
    if (params[i].manifold == Manifold::poincare_ball) {
      auto* st = std::get_if<optim::RiemannianAdamState>(&slot.state);
      if (!st || !ball) throw UsageError("ball parameter without a Riemannian optimizer");
      optim::riemannian_adam_step(params[i].values, grads[i].values, *ball, *st);
    } else {
      auto* st = std::get_if<optim::AdamState>(&slot.state);
      if (!st) throw UsageError("euclidean parameter with a Riemannian optimizer");
      optim::adam_step(params[i].values, grads[i].values, *st);
    }
  }
}

TrainResult train_syntax(const TrainConfig& config, std::span<const data::SyntaxExample> train,
                         std::span<const data::SyntaxExample> dev, const EpochCallback& on_epoch) {
  config.validate();
  if (config.task == Task::sentiment) throw UsageError("sentiment task needs a sentiment corpus");
  const auto tv = views<SyntaxView>(train);
  const auto dv = views<SyntaxView>(dev);
  return run<SyntaxView>(
      config, std::span<const SyntaxView>(tv), std::span<const SyntaxView>(dv),
      [](const ProbeModel& m, const std::vector<const data::SyntaxExample*>& b, unsigned threads) {
        return probes::syntax_loss(m, b, threads);
      },
      on_epoch);
}

TrainResult train_sentiment(const TrainConfig& config,
                            std::span<const data::SentimentExample> train,
                            std::span<const data::SentimentExample> dev,
                            const EpochCallback& on_epoch) {
  config.validate();
  if (config.task != Task::sentiment) throw UsageError("syntax tasks need a treebank corpus");
  const auto tv = views<SentimentView>(train);
  const auto dv = views<SentimentView>(dev);
  return run<SentimentView>(
      config, std::span<const SentimentView>(tv), std::span<const SentimentView>(dv),
      [](const ProbeModel& m, const std::vector<const data::SentimentExample*>& b,
         unsigned threads) { return probes::sentiment_loss(m, b, threads); },
      on_epoch);
}

void write_log(std::ostream& out, const std::vector<EpochRecord>& log, bool include_wall) {
  out << "# epoch\ttrain_loss\tdev_loss\tlr" << (include_wall ? "\twall_seconds" : "") << '\n';
  for (const auto& r : log) {
    std::ostringstream line;
    line << std::setprecision(17) << r.epoch << '\t' << r.train_loss << '\t' << r.dev_loss << '\t'
         << r.lr;
    if (include_wall) line << '\t' << std::fixed << std::setprecision(3) << r.wall_seconds;
    out << line.str() << '\n';
  }
}

std::vector<EpochRecord> read_log(std::istream& in) {
  std::vector<EpochRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream s(line);
    EpochRecord r;
    if (!(s >> r.epoch >> r.train_loss >> r.dev_loss >> r.lr)) {
      throw DataError("malformed training log line: " + line);
    }
    s >> r.wall_seconds;
    out.push_back(r);
  }
  return out;
}

}  // namespace hyperprobe::train
