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

#include "hyperprobe/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hyperprobe/error.hpp"

namespace hyperprobe::optim {

namespace {

using ConstMap = Eigen::Map<const Eigen::VectorXd>;
using Map = Eigen::Map<Eigen::VectorXd>;

void check_shapes(std::span<double> param, std::span<const double> grad,
                  const AdamState& state, const char* op) {
  const auto n = static_cast<Eigen::Index>(param.size());
  if (static_cast<Eigen::Index>(grad.size()) != n || state.first_moment.size() != n ||
      state.second_moment.size() != n) {
    throw UsageError(std::string(op) + ": parameter, gradient and moment sizes differ");
  }
  if (!ConstMap(grad.data(), n).allFinite()) {
    throw NumericalError(std::string(op) + ": non-finite gradient, step rejected");
  }
}

// Advances the moments with g and returns m_hat / (sqrt(v_hat) + eps).
Eigen::VectorXd advance_moments(const Eigen::VectorXd& g, AdamState& state) {
  const auto& h = state.hyper;
  state.step_count += 1;
  state.first_moment = h.beta1 * state.first_moment + (1.0 - h.beta1) * g;
  state.second_moment =
      h.beta2 * state.second_moment + (1.0 - h.beta2) * g.cwiseProduct(g);
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(h.beta1, t);
  const double bias2 = 1.0 - std::pow(h.beta2, t);
  return (state.first_moment / bias1).array() /
         ((state.second_moment / bias2).array().sqrt() + h.eps);
}

}  // namespace

AdamState AdamState::fresh(Eigen::Index size, const AdamHyperparams& hyper) {
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(size);
  s.second_moment = Eigen::VectorXd::Zero(size);
  s.hyper = hyper;
  return s;
}

RiemannianAdamState RiemannianAdamState::fresh(Eigen::Index size,
                                               const AdamHyperparams& hyper) {
  RiemannianAdamState s;
  static_cast<AdamState&>(s) = AdamState::fresh(size, hyper);
  return s;
}

void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state) {
  check_shapes(param, grad, state, "adam_step");
  const auto n = static_cast<Eigen::Index>(param.size());
  const Eigen::VectorXd direction = advance_moments(ConstMap(grad.data(), n), state);
  Map(param.data(), n) -= state.hyper.lr * direction;
}

void riemannian_adam_step(std::span<double> point, std::span<const double> euclidean_grad,
                          const geometry::Ball& ball, RiemannianAdamState& state) {
  check_shapes(point, euclidean_grad, state, "riemannian_adam_step");
  const auto n = static_cast<Eigen::Index>(point.size());
  Map x(point.data(), n);
  if (!geometry::inside_ball(x, ball)) {
    throw NumericalError("riemannian_adam_step: parameter left the ball");
  }
  const double lambda = geometry::kernel::conformal_factor(x, ball);
  const Eigen::VectorXd riemannian_grad = ConstMap(euclidean_grad.data(), n) / (lambda * lambda);
  const Eigen::VectorXd direction = advance_moments(riemannian_grad, state);
  x = geometry::kernel::exp_map(x, -state.hyper.lr * direction, ball);
}

GradCheckResult finite_difference_check(const ScalarLoss& loss, std::span<const double> params,
                                        std::span<const double> analytic_grad, double h) {
  if (params.size() != analytic_grad.size()) {
    throw UsageError("finite_difference_check: gradient size does not match parameters");
  }
  if (!(h > 0.0)) throw UsageError("finite_difference_check: step must be positive");
  std::vector<double> probe(params.begin(), params.end());
  GradCheckResult result;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = loss(probe);
    probe[i] = saved - h;
    const double down = loss(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("finite_difference_check: loss is not finite at coordinate " +
                           std::to_string(i));
    }
    const double fd = (up - down) / (2.0 * h);
    const double an = analytic_grad[i];
    const double err = std::abs(fd - an) / std::max(1e-8, std::abs(fd) + std::abs(an));
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace hyperprobe::optim
