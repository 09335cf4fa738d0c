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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "hyperprobe/geometry.hpp"

namespace hyperprobe::optim {

struct AdamHyperparams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::uint64_t step_count = 0;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  AdamHyperparams hyper;

  static AdamState fresh(Eigen::Index size, const AdamHyperparams& hyper = {});
};

/// Moments live in tangent coordinates at the current point and are carried
/// over unchanged when the point moves (no parallel transport).
struct RiemannianAdamState : AdamState {
  static RiemannianAdamState fresh(Eigen::Index size, const AdamHyperparams& hyper = {});
};

/// Bias-corrected Adam update, in place. A non-finite gradient throws
/// NumericalError and leaves both param and state untouched.
void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state);

/// Adam on a ball-valued parameter: the Euclidean gradient is rescaled by the
/// inverse metric 1/lambda_x^2, the moments are updated on that, and the step
/// is retracted with exp_x(-lr * m_hat / (sqrt(v_hat) + eps)).
void riemannian_adam_step(std::span<double> point, std::span<const double> euclidean_grad,
                          const geometry::Ball& ball, RiemannianAdamState& state);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

using ScalarLoss = std::function<double(std::span<const double>)>;

/// Central differences against an analytic gradient. The per-coordinate error
/// is |fd - an| / max(1e-8, |fd| + |an|).
GradCheckResult finite_difference_check(const ScalarLoss& loss, std::span<const double> params,
                                        std::span<const double> analytic_grad, double h = 1e-5);

}  // namespace hyperprobe::optim
