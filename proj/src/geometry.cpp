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

#include "hyperprobe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hyperprobe/error.hpp"

namespace hyperprobe::geometry {

namespace {

// Projected points land this far (relatively) inside the margin so that
// c|x|^2 < 1 - ball_eps holds strictly after rounding.
constexpr double kProjectionShrink = 1e-12;

void require_same_space(const BallPoint& x, const BallPoint& y, const char* op) {
  if (x.dim() != y.dim()) {
    throw UsageError(std::string(op) + ": dimension mismatch (" + std::to_string(x.dim()) +
                     " vs " + std::to_string(y.dim()) + ")");
  }
  if (!(x.ball() == y.ball())) {
    throw UsageError(std::string(op) + ": curvature mismatch");
  }
}

double clamped_atanh(double arg, const Ball& ball) {
  return std::atanh(std::clamp(arg, 0.0, 1.0 - ball.atanh_eps));
}

// Raw Mobius addition without projection.
Vector mobius_add_raw(const Vector& x, const Vector& y, double c) {
  const double xy = x.dot(y);
  const double x2 = x.squaredNorm();
  const double y2 = y.squaredNorm();
  const double num_x = 1.0 + 2.0 * c * xy + c * y2;
  const double num_y = 1.0 - c * x2;
  const double den = std::max(1.0 + 2.0 * c * xy + c * c * x2 * y2, 1e-15);
  return (num_x * x + num_y * y) / den;
}

}  // namespace

Curvature::Curvature(double c) : c_(c), sqrt_c_(std::sqrt(c)) {
  if (!std::isfinite(c) || !(c > 0.0)) {
    throw UsageError("curvature must be finite and > 0, got " + std::to_string(c));
  }
}

Ball::Ball(double curvature, double ball_margin, double atanh_margin)
    : c(curvature), ball_eps(ball_margin), atanh_eps(atanh_margin) {
  if (!(ball_margin > 0.0 && ball_margin < 1.0) || !(atanh_margin > 0.0 && atanh_margin < 1.0)) {
    throw UsageError("ball margins must lie in (0, 1)");
  }
}

TangentVector::TangentVector(Vector coords) : coords_(std::move(coords)) {
  if (!coords_.allFinite()) throw DataError("tangent vector has non-finite entries");
}

bool inside_ball(const Vector& x, const Ball& ball) {
  return x.allFinite() && ball.c.value() * x.squaredNorm() < ball.max_scaled_sq_norm();
}

BallPoint::BallPoint(Vector coords, Ball ball) : coords_(std::move(coords)), ball_(ball) {
  if (!coords_.allFinite()) throw DataError("ball point has non-finite entries");
  if (!inside_ball(coords_, ball_)) {
    throw DataError("point lies outside the admissible ball interior (c|x|^2 = " +
                    std::to_string(ball_.c.value() * coords_.squaredNorm()) + ")");
  }
}

BallPoint BallPoint::origin(Eigen::Index dim, const Ball& ball) {
  return BallPoint(Vector::Zero(dim), ball, Trusted{});
}

BallPoint BallPoint::operator-() const { return BallPoint(-coords_, ball_, Trusted{}); }

BallPoint project_to_ball(const Vector& x, const Ball& ball) {
  if (x.hasNaN()) throw DataError("project_to_ball: NaN input");
  if (!x.allFinite()) throw DataError("project_to_ball: infinite input");
  return BallPoint(kernel::project(x, ball), ball, BallPoint::Trusted{});
}

BallPoint mobius_add(const BallPoint& x, const BallPoint& y) {
  require_same_space(x, y, "mobius_add");
  return project_to_ball(kernel::mobius_add(x.coords(), y.coords(), x.ball()), x.ball());
}

BallPoint mobius_matvec(const Matrix& m, const BallPoint& x) {
  if (m.cols() != x.dim()) {
    throw UsageError("mobius_matvec: matrix has " + std::to_string(m.cols()) +
                     " columns but the point has dimension " + std::to_string(x.dim()));
  }
  if (!m.allFinite()) throw DataError("mobius_matvec: non-finite matrix");
  return project_to_ball(kernel::mobius_matvec(m, x.coords(), x.ball()), x.ball());
}

BallPoint exp_map(const BallPoint& x, const TangentVector& v) {
  if (v.dim() != x.dim()) throw UsageError("exp_map: dimension mismatch");
  return project_to_ball(kernel::exp_map(x.coords(), v.coords(), x.ball()), x.ball());
}

TangentVector log_map(const BallPoint& x, const BallPoint& y) {
  require_same_space(x, y, "log_map");
  return TangentVector(kernel::log_map(x.coords(), y.coords(), x.ball()));
}

double distance(const BallPoint& x, const BallPoint& y) {
  require_same_space(x, y, "distance");
  return kernel::distance(x.coords(), y.coords(), x.ball());
}

double conformal_factor(const BallPoint& x) {
  return kernel::conformal_factor(x.coords(), x.ball());
}

namespace kernel {

Vector project(const Vector& x, const Ball& ball) {
  const double c = ball.c.value();
  const double n2 = x.squaredNorm();
  if (c * n2 < ball.max_scaled_sq_norm()) return x;
  const double target = std::sqrt(ball.max_scaled_sq_norm() / c) * (1.0 - kProjectionShrink);
  return x * (target / std::sqrt(n2));
}

Vector project_vjp(const Vector& x, const Vector& grad_out, const Ball& ball) {
  const double c = ball.c.value();
  const double n2 = x.squaredNorm();
  if (c * n2 < ball.max_scaled_sq_norm()) return grad_out;
  const double n = std::sqrt(n2);
  const double target = std::sqrt(ball.max_scaled_sq_norm() / c) * (1.0 - kProjectionShrink);
  const Vector unit = x / n;
  return (target / n) * (grad_out - unit * unit.dot(grad_out));
}

Vector mobius_add(const Vector& x, const Vector& y, const Ball& ball) {
  return project(mobius_add_raw(x, y, ball.c.value()), ball);
}

Vector mobius_matvec(const Matrix& m, const Vector& x, const Ball& ball) {
  Vector mx = m * x;
  const double nmx = mx.norm();
  if (nmx < kZeroImageNorm) return Vector::Zero(m.rows());
  const double s = ball.c.sqrt();
  const double nx = x.norm();
  const double a = clamped_atanh(s * nx, ball);
  return project((std::tanh(nmx / nx * a) / (s * nmx)) * mx, ball);
}

Vector exp_map(const Vector& x, const Vector& v, const Ball& ball) {
  const double nv = v.norm();
  if (nv < kZeroTangentNorm) return x;
  const double s = ball.c.sqrt();
  const double lambda = conformal_factor(x, ball);
  const Vector step = (std::tanh(s * lambda * nv / 2.0) / (s * nv)) * v;
  return project(mobius_add_raw(x, step, ball.c.value()), ball);
}

Vector log_map(const Vector& x, const Vector& y, const Ball& ball) {
  const Vector w = mobius_add_raw(-x, y, ball.c.value());
  const double nw = w.norm();
  const double s = ball.c.sqrt();
  const double artanh = clamped_atanh(s * nw, ball);
  if (2.0 / s * artanh < kCoincidentDistance) return Vector::Zero(x.size());
  const double lambda = conformal_factor(x, ball);
  return (2.0 / (s * lambda) * artanh / nw) * w;
}

Vector exp0(const Vector& v, const Ball& ball) {
  const double nv = v.norm();
  if (nv < kZeroTangentNorm) return Vector::Zero(v.size());
  const double s = ball.c.sqrt();
  return project((std::tanh(s * nv) / (s * nv)) * v, ball);
}

Vector log0(const Vector& y, const Ball& ball) {
  const double ny = y.norm();
  const double s = ball.c.sqrt();
  const double artanh = clamped_atanh(s * ny, ball);
  if (2.0 / s * artanh < kCoincidentDistance) return Vector::Zero(y.size());
  return (artanh / (s * ny)) * y;
}

double distance(const Vector& x, const Vector& y, const Ball& ball) {
  const double s = ball.c.sqrt();
  const double nw = mobius_add_raw(-x, y, ball.c.value()).norm();
  return 2.0 / s * clamped_atanh(s * nw, ball);
}

double distance_to_origin(const Vector& x, const Ball& ball) {
  const double s = ball.c.sqrt();
  return 2.0 / s * clamped_atanh(s * x.norm(), ball);
}

double conformal_factor(const Vector& x, const Ball& ball) {
  return 2.0 / (1.0 - ball.c.value() * x.squaredNorm());
}

Vector exp0_vjp(const Vector& v, const Vector& grad_out, const Ball& ball) {
  const double n = v.norm();
  if (n < kZeroTangentNorm) return grad_out;
  const double s = ball.c.sqrt();
  const double sn = s * n;
  const double th = std::tanh(sn);
  const double f = th / sn;
  // f'(n) for f(n) = tanh(sn)/(sn); series near zero avoids cancellation.
  const double df = sn < 1e-4 ? -2.0 / 3.0 * s * s * n : ((1.0 - th * th) * sn - th) / (s * n * n);
  const Vector g = project_vjp(f * v, grad_out, ball);
  return f * g + (df * v.dot(g) / n) * v;
}

MatvecVjp mobius_matvec_vjp(const Matrix& m, const Vector& x, const Vector& grad_out,
                            const Ball& ball) {
  MatvecVjp out{Matrix::Zero(m.rows(), m.cols()), Vector::Zero(x.size())};
  const Vector mx = m * x;
  const double nmx = mx.norm();
  if (nmx < kZeroImageNorm) return out;

  const double c = ball.c.value();
  const double s = ball.c.sqrt();
  const double nx = x.norm();
  const double scaled = s * nx;
  const bool clamped = scaled >= 1.0 - ball.atanh_eps;
  const double a = clamped_atanh(scaled, ball);
  const double t = nmx * a / nx;
  const double th = std::tanh(t);
  const double sech2 = 1.0 - th * th;
  const double phi = th / (s * nmx);

  const Vector g = project_vjp(phi * mx, grad_out, ball);
  const double g_dot_mx = g.dot(mx);

  const double dphi_dnmx = (sech2 * (a / nx) * nmx - th) / (s * nmx * nmx);
  const double da_dnx = clamped ? 0.0 : s / (1.0 - c * nx * nx);
  const double dt_dnx = nmx * (da_dnx * nx - a) / (nx * nx);
  const double dphi_dnx = sech2 * dt_dnx / (s * nmx);

  const Vector d_mx = phi * g + (g_dot_mx * dphi_dnmx / nmx) * mx;
  out.d_matrix = d_mx * x.transpose();
  out.d_point = m.transpose() * d_mx + (g_dot_mx * dphi_dnx / nx) * x;
  return out;
}

namespace {

struct PairTerms {
  double dist;
  double z;
  bool clamped;
  Vector dz_dx;
  Vector dz_dy;
};

// d(x, y) through the Mobius route, with dz/dx and dz/dy for the equivalent
// form d = acosh(1 + z) / sqrt(c), z = 2c|x-y|^2 / ((1-c|x|^2)(1-c|y|^2)).
PairTerms pair_terms(const Vector& x, const Vector& y, const Ball& ball) {
  const double c = ball.c.value();
  const double s = ball.c.sqrt();
  const double nw = mobius_add_raw(-x, y, c).norm();
  PairTerms t;
  t.clamped = s * nw >= 1.0 - ball.atanh_eps;
  t.dist = 2.0 / s * clamped_atanh(s * nw, ball);
  const Vector diff = x - y;
  const double d2 = diff.squaredNorm();
  const double alpha = 1.0 - c * x.squaredNorm();
  const double beta = 1.0 - c * y.squaredNorm();
  const double scale = 4.0 * c / (alpha * beta);
  t.z = 2.0 * c * d2 / (alpha * beta);
  t.dz_dx = scale * (diff + (c * d2 / alpha) * x);
  t.dz_dy = scale * (-diff + (c * d2 / beta) * y);
  return t;
}

}  // namespace

PairGradient squared_distance_grad(const Vector& x, const Vector& y, const Ball& ball) {
  const PairTerms t = pair_terms(x, y, ball);
  PairGradient out;
  out.value = t.dist * t.dist;
  if (t.clamped) {
    out.d_x = Vector::Zero(x.size());
    out.d_y = Vector::Zero(y.size());
    return out;
  }
  const double c = ball.c.value();
  const double k = t.z > 0.0 ? 2.0 * t.dist / (ball.c.sqrt() * std::sqrt(t.z * (t.z + 2.0)))
                             : 2.0 / c;
  out.d_x = k * t.dz_dx;
  out.d_y = k * t.dz_dy;
  return out;
}

PairGradient distance_grad(const Vector& x, const Vector& y, const Ball& ball) {
  const PairTerms t = pair_terms(x, y, ball);
  PairGradient out;
  out.value = t.dist;
  if (t.clamped || !(t.z > 0.0)) {
    out.d_x = Vector::Zero(x.size());
    out.d_y = Vector::Zero(y.size());
    return out;
  }
  const double k = 1.0 / (ball.c.sqrt() * std::sqrt(t.z * (t.z + 2.0)));
  out.d_x = k * t.dz_dx;
  out.d_y = k * t.dz_dy;
  return out;
}

}  // namespace kernel

}  // namespace hyperprobe::geometry
