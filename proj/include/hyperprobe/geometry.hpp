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

/** Generalized Poincare ball of curvature -c: gyrovector operations,
 * exponential/logarithmic maps, geodesic distance, and the vector-Jacobian
 * products the probes need for analytic gradients.
 *
 * Everything here is a pure function of its arguments. The typed surface
 * (BallPoint, TangentVector) validates inputs; the `kernel` namespace works on
 * raw Eigen vectors and is what the hot loops in the probes call. */

#pragma once

#include <Eigen/Dense>

namespace hyperprobe::geometry {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultBallEps = 1e-5;
inline constexpr double kDefaultAtanhEps = 1e-9;

// Zero-branch thresholds.
inline constexpr double kZeroTangentNorm = 1e-15;
inline constexpr double kZeroImageNorm = 1e-12;
inline constexpr double kCoincidentDistance = 1e-12;

/// Magnitude c > 0 of the (negative) sectional curvature.
class Curvature {
 public:
  explicit Curvature(double c);
  double value() const noexcept { return c_; }
  double sqrt() const noexcept { return sqrt_c_; }
  bool operator==(const Curvature& other) const noexcept { return c_ == other.c_; }

 private:
  double c_;
  double sqrt_c_;
};

/// The ball D_c together with its numerical margins. Points are kept at
/// c|x|^2 < 1 - ball_eps, and atanh arguments are clamped to 1 - atanh_eps.
struct Ball {
  Curvature c;
  double ball_eps = kDefaultBallEps;
  double atanh_eps = kDefaultAtanhEps;

  explicit Ball(double curvature, double ball_margin = kDefaultBallEps,
                double atanh_margin = kDefaultAtanhEps);

  /// Largest admissible c|x|^2 (exclusive).
  double max_scaled_sq_norm() const noexcept { return 1.0 - ball_eps; }
  bool operator==(const Ball& other) const noexcept {
    return c == other.c && ball_eps == other.ball_eps && atanh_eps == other.atanh_eps;
  }
};

class TangentVector {
 public:
  explicit TangentVector(Vector coords);
  static TangentVector zero(Eigen::Index dim) { return TangentVector(Vector::Zero(dim)); }
  const Vector& coords() const noexcept { return coords_; }
  Eigen::Index dim() const noexcept { return coords_.size(); }

 private:
  Vector coords_;
};

class BallPoint {
 public:
  /// Throws DataError unless coords are finite and strictly inside the ball.
  BallPoint(Vector coords, Ball ball);
  static BallPoint origin(Eigen::Index dim, const Ball& ball);

  const Vector& coords() const noexcept { return coords_; }
  const Ball& ball() const noexcept { return ball_; }
  Eigen::Index dim() const noexcept { return coords_.size(); }

  BallPoint operator-() const;

 private:
  struct Trusted {};
  BallPoint(Vector coords, Ball ball, Trusted) : coords_(std::move(coords)), ball_(ball) {}
  friend BallPoint project_to_ball(const Vector& x, const Ball& ball);

  Vector coords_;
  Ball ball_;
};

/// True when the vector is finite and satisfies c|x|^2 < 1 - ball_eps.
bool inside_ball(const Vector& x, const Ball& ball);

BallPoint mobius_add(const BallPoint& x, const BallPoint& y);
BallPoint mobius_matvec(const Matrix& m, const BallPoint& x);
BallPoint exp_map(const BallPoint& x, const TangentVector& v);
TangentVector log_map(const BallPoint& x, const BallPoint& y);
double distance(const BallPoint& x, const BallPoint& y);
double conformal_factor(const BallPoint& x);

/// Radially clamps x into the admissible interior. Throws DataError on NaN.
BallPoint project_to_ball(const Vector& x, const Ball& ball);

namespace kernel {

// Unchecked versions of the operations above. Inputs are assumed finite and,
// where relevant, inside the ball; outputs are projected.

Vector project(const Vector& x, const Ball& ball);
Vector mobius_add(const Vector& x, const Vector& y, const Ball& ball);
Vector mobius_matvec(const Matrix& m, const Vector& x, const Ball& ball);
Vector exp_map(const Vector& x, const Vector& v, const Ball& ball);
Vector log_map(const Vector& x, const Vector& y, const Ball& ball);
Vector exp0(const Vector& v, const Ball& ball);
Vector log0(const Vector& y, const Ball& ball);
double distance(const Vector& x, const Vector& y, const Ball& ball);
double distance_to_origin(const Vector& x, const Ball& ball);
double conformal_factor(const Vector& x, const Ball& ball);

/// Vector-Jacobian product of project() at x.
Vector project_vjp(const Vector& x, const Vector& grad_out, const Ball& ball);

/// Gradient w.r.t. v of <grad_out, exp0(v)>.
Vector exp0_vjp(const Vector& v, const Vector& grad_out, const Ball& ball);

struct MatvecVjp {
  Matrix d_matrix;
  Vector d_point;
};
/// Gradients w.r.t. M and x of <grad_out, mobius_matvec(M, x)>.
MatvecVjp mobius_matvec_vjp(const Matrix& m, const Vector& x, const Vector& grad_out,
                            const Ball& ball);

struct PairGradient {
  double value = 0.0;
  Vector d_x;
  Vector d_y;
};
/// d(x, y)^2 and its gradient in both arguments.
PairGradient squared_distance_grad(const Vector& x, const Vector& y, const Ball& ball);
/// d(x, y) and its gradient; the subgradient at x == y is zero.
PairGradient distance_grad(const Vector& x, const Vector& y, const Ball& ball);

}  // namespace kernel

}  // namespace hyperprobe::geometry
