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

#include <cmath>

#include <gtest/gtest.h>

#include "hyperprobe/error.hpp"
#include "hyperprobe/geometry.hpp"
#include "test_support.hpp"

using namespace hyperprobe;
using namespace hyperprobe::geometry;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// 1-D oracles: on a line through the origin the ball is isometric to a
// hyperbolic line, where Mobius addition adds rapidities.
double scalar_mobius_add(double x, double y) { return std::tanh(std::atanh(x) + std::atanh(y)); }
double scalar_mobius_scale(double r, double x) { return std::tanh(r * std::atanh(x)); }

const double kCurvatures[] = {0.1, 0.5, 1.0};

}  // namespace

TEST(Geometry, ScalarOracleAgreesWithClosedForm) {
  // tanh(atanh(.3) + atanh(.4)) = (.3 + .4) / (1 + .12)
  EXPECT_NEAR(scalar_mobius_add(0.3, 0.4), 0.625, 1e-15);
  // tanh(2 atanh(x)) = 2x / (1 + x^2)
  EXPECT_NEAR(scalar_mobius_scale(2.0, 0.3), 0.6 / 1.09, 1e-15);
}

TEST(Geometry, MobiusAddCollinear) {
  const Ball ball(1.0);
  const BallPoint x(vec2(0.3, 0.0), ball), y(vec2(0.4, 0.0), ball);
  const BallPoint z = mobius_add(x, y);
  EXPECT_NEAR(z.coords()(0), scalar_mobius_add(0.3, 0.4), 1e-15);
  EXPECT_NEAR(z.coords()(0), 0.625, 1e-15);
  EXPECT_EQ(z.coords()(1), 0.0);
}

TEST(Geometry, MobiusAddIdentityAndInverse) {
  testkit::Gen gen(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c = kCurvatures[trial % 3];
    const Ball ball(c);
    const Eigen::Index k = gen.integer(1, 8);
    const BallPoint x(gen.ball_point(k, c, 0.99), ball);
    const BallPoint y(gen.ball_point(k, c, 0.99), ball);
    EXPECT_LT((mobius_add(BallPoint::origin(k, ball), y).coords() - y.coords()).norm(), 1e-12);
    EXPECT_LT(mobius_add(-x, x).coords().norm(), 1e-12);
  }
}

TEST(Geometry, MobiusAddRejectsMismatch) {
  const BallPoint a(vec2(0.1, 0.1), Ball(1.0));
  const BallPoint b(Vector::Zero(3), Ball(1.0));
  const BallPoint c(vec2(0.1, 0.1), Ball(0.5));
  EXPECT_THROW(mobius_add(a, b), UsageError);
  EXPECT_THROW(mobius_add(a, c), UsageError);
}

TEST(Geometry, MatvecBranches) {
  const Ball ball(1.0);
  const BallPoint x(vec2(0.3, 0.0), ball);
  EXPECT_LT((mobius_matvec(Matrix::Identity(2, 2), x).coords() - x.coords()).norm(), 1e-15);
  EXPECT_EQ(mobius_matvec(Matrix::Zero(2, 2), x).coords().norm(), 0.0);

  Matrix doubling = 2.0 * Matrix::Identity(2, 2);
  const BallPoint y = mobius_matvec(doubling, x);
  EXPECT_NEAR(y.coords()(0), scalar_mobius_scale(2.0, 0.3), 1e-14);
  EXPECT_NEAR(y.coords()(0), 0.550459, 1e-6);

  Matrix wide(3, 2);
  wide.setOnes();
  EXPECT_EQ(mobius_matvec(wide, x).dim(), 3);
  EXPECT_THROW(mobius_matvec(Matrix::Identity(3, 3), x), UsageError);
}

TEST(Geometry, MatvecIdentityAndNormOracle) {
  testkit::Gen gen(12);
  const Ball unit(1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c = kCurvatures[trial % 3];
    const Ball ball(c);
    const Eigen::Index k = gen.integer(1, 6);
    const BallPoint x(gen.ball_point(k, c, 0.95), ball);
    EXPECT_LT((mobius_matvec(Matrix::Identity(k, k), x).coords() - x.coords()).norm(), 1e-12);

    const Eigen::Index rows = gen.integer(1, 6);
    const Matrix m = gen.gaussian(rows, k, 0.5);
    const BallPoint xu(gen.ball_point(k, 1.0, 0.9), unit);
    const double ratio = (m * xu.coords()).norm() / xu.coords().norm();
    const double expected = scalar_mobius_scale(ratio, xu.coords().norm());
    const Vector got = mobius_matvec(m, xu).coords();
    if (expected * expected < 1.0 - 1e-5) EXPECT_NEAR(got.norm(), expected, 1e-12);
    // Direction is that of Mx.
    EXPECT_NEAR(got.normalized().dot((m * xu.coords()).normalized()), 1.0, 1e-12);
  }
}

TEST(Geometry, ExpLogAtOrigin) {
  const Ball ball(1.0);
  const BallPoint o = BallPoint::origin(2, ball);
  const BallPoint y = exp_map(o, TangentVector(vec2(1.0, 0.0)));
  EXPECT_NEAR(y.coords()(0), std::tanh(1.0), 1e-15);
  EXPECT_NEAR(y.coords()(0), 0.76159, 1e-5);
  const TangentVector v = log_map(o, BallPoint(vec2(std::tanh(1.0), 0.0), ball));
  EXPECT_NEAR(v.coords()(0), 1.0, 1e-14);
  EXPECT_EQ(v.coords()(1), 0.0);
  // |log_0(y)| = atanh(|y|) for c = 1.
  const BallPoint z(vec2(0.3, -0.4), ball);
  EXPECT_NEAR(log_map(o, z).coords().norm(), std::atanh(0.5), 1e-14);
}

TEST(Geometry, ZeroBranchesAreExact) {
  const Ball ball(0.5);
  const BallPoint x(vec2(0.2, -0.7), ball);
  const BallPoint same = exp_map(x, TangentVector::zero(2));
  EXPECT_EQ(same.coords(), x.coords());
  EXPECT_EQ(log_map(x, x).coords().norm(), 0.0);
  EXPECT_EQ(distance(x, x), 0.0);
}

TEST(Geometry, ExpLogRoundTrips) {
  testkit::Gen gen(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c = kCurvatures[trial % 3];
    const Ball ball(c);
    const Eigen::Index k = gen.integer(1, 8);
    const BallPoint x(gen.ball_point(k, c, 0.9), ball);
    // Tangent vectors of Riemannian length lambda_x |v| <= 3.
    Vector v = gen.gaussian(k).normalized() * gen.uniform(0.0, 3.0);
    v /= conformal_factor(x);
    const Vector back = log_map(x, exp_map(x, TangentVector(v))).coords();
    EXPECT_LT((back - v).norm(), 1e-9) << "trial " << trial;

    const BallPoint y(gen.ball_point(k, c, 0.9), ball);
    const Vector again = exp_map(x, log_map(x, y)).coords();
    EXPECT_LT((again - y.coords()).norm(), 1e-9) << "trial " << trial;
  }
}

TEST(Geometry, DistanceIsAMetric) {
  testkit::Gen gen(14);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c = kCurvatures[trial % 3];
    const Ball ball(c);
    const Eigen::Index k = gen.integer(1, 8);
    const BallPoint x(gen.ball_point(k, c, 0.95), ball);
    const BallPoint y(gen.ball_point(k, c, 0.95), ball);
    const BallPoint z(gen.ball_point(k, c, 0.95), ball);
    const double dxy = distance(x, y);
    EXPECT_GE(dxy, 0.0);
    EXPECT_NEAR(dxy, distance(y, x), 1e-12);
    EXPECT_LE(distance(x, z), dxy + distance(y, z) + 1e-9);
  }
}

TEST(Geometry, DistanceFromOrigin) {
  const Ball ball(1.0);
  const BallPoint x(vec2(0.3, 0.4), ball);
  EXPECT_NEAR(distance(BallPoint::origin(2, ball), x), 2.0 * std::atanh(0.5), 1e-15);
  EXPECT_NEAR(distance(BallPoint::origin(2, ball), x), 1.09861, 1e-5);
}

TEST(Geometry, EuclideanLimit) {
  testkit::Gen gen(15);
  const Ball ball(1e-8);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index k = gen.integer(1, 8);
    const Vector x = gen.gaussian(k), y = gen.gaussian(k);
    const double d = distance(BallPoint(x, ball), BallPoint(y, ball));
    const double e = 2.0 * (x - y).norm();
    EXPECT_LT(std::abs(d - e) / e, 1e-3);
  }
}

TEST(Geometry, ConformalFactor) {
  const Ball ball(1.0);
  EXPECT_EQ(conformal_factor(BallPoint::origin(3, ball)), 2.0);
  const BallPoint half(vec2(std::sqrt(0.5), 0.0), ball);
  EXPECT_NEAR(conformal_factor(half), 4.0, 1e-12);
  double prev = 2.0;
  for (double r = 0.1; r < 0.999; r += 0.1) {
    const double lambda = conformal_factor(BallPoint(vec2(r, 0.0), ball));
    EXPECT_GT(lambda, prev);
    prev = lambda;
  }
}

TEST(Geometry, ProjectToBall) {
  const Ball ball(1.0);
  const Vector inside = vec2(0.3, 0.2);
  EXPECT_EQ(project_to_ball(inside, ball).coords(), inside);
  const BallPoint clipped = project_to_ball(vec2(2.0, 0.0), ball);
  EXPECT_NEAR(clipped.coords().squaredNorm(), 1.0 - 1e-5, 1e-11);
  EXPECT_LT(clipped.coords().squaredNorm(), 1.0 - 1e-5);
  EXPECT_EQ(clipped.coords()(1), 0.0);
  const BallPoint boundary = project_to_ball(vec2(0.6, 0.8), ball);
  EXPECT_TRUE(inside_ball(boundary.coords(), ball));
  EXPECT_THROW(project_to_ball(vec2(std::nan(""), 0.0), ball), DataError);
  EXPECT_THROW(BallPoint(vec2(1.0, 0.0), ball), DataError);
}

TEST(Geometry, OutputsStayInsideTheBall) {
  testkit::Gen gen(16);
  for (int trial = 0; trial < 500; ++trial) {
    const double c = kCurvatures[trial % 3];
    const Ball ball(c);
    const BallPoint x(gen.ball_point(4, c, 0.99999), ball);
    const BallPoint y(gen.ball_point(4, c, 0.99999), ball);
    EXPECT_TRUE(inside_ball(mobius_add(x, y).coords(), ball));
    EXPECT_TRUE(inside_ball(mobius_matvec(gen.gaussian(4, 4, 10.0), x).coords(), ball));
    EXPECT_TRUE(inside_ball(exp_map(x, TangentVector(gen.gaussian(4) * 50.0)).coords(), ball));
  }
}

TEST(Geometry, CurvatureValidation) {
  EXPECT_THROW(Curvature(0.0), UsageError);
  EXPECT_THROW(Curvature(-1.0), UsageError);
  EXPECT_THROW(Curvature(std::nan("")), UsageError);
}

// ---- vector-Jacobian products against central differences -----------------

namespace {

template <typename F>
Vector numeric_grad(F f, Vector x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x(i);
    x(i) = saved + h;
    const double up = f(x);
    x(i) = saved - h;
    const double down = f(x);
    x(i) = saved;
    g(i) = (up - down) / (2 * h);
  }
  return g;
}

double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1e-12, a.norm() + b.norm());
}

}  // namespace

TEST(GeometryKernel, Exp0Vjp) {
  testkit::Gen gen(21);
  for (double c : kCurvatures) {
    const Ball ball(c);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector v = gen.gaussian(5) * 0.7;
      const Vector w = gen.gaussian(5);
      auto f = [&](const Vector& u) { return w.dot(kernel::exp0(u, ball)); };
      EXPECT_LT(rel_err(kernel::exp0_vjp(v, w, ball), numeric_grad(f, v)), 1e-7);
    }
  }
}

TEST(GeometryKernel, MatvecVjp) {
  testkit::Gen gen(22);
  for (double c : kCurvatures) {
    const Ball ball(c);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix m = gen.gaussian(4, 3, 0.6);
      const Vector x = gen.ball_point(3, c, 0.8);
      const Vector w = gen.gaussian(4);
      const auto vjp = kernel::mobius_matvec_vjp(m, x, w, ball);
      auto fx = [&](const Vector& p) { return w.dot(kernel::mobius_matvec(m, p, ball)); };
      EXPECT_LT(rel_err(vjp.d_point, numeric_grad(fx, x)), 1e-7);
      auto fm = [&](const Vector& flat) {
        return w.dot(kernel::mobius_matvec(Eigen::Map<const Matrix>(flat.data(), 4, 3), x, ball));
      };
      const Vector flat = Eigen::Map<const Vector>(m.data(), m.size());
      const Vector dm = Eigen::Map<const Vector>(vjp.d_matrix.data(), vjp.d_matrix.size());
      EXPECT_LT(rel_err(dm, numeric_grad(fm, flat)), 1e-7);
    }
  }
}

TEST(GeometryKernel, DistanceGradients) {
  testkit::Gen gen(23);
  for (double c : kCurvatures) {
    const Ball ball(c);
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = gen.ball_point(4, c, 0.9), y = gen.ball_point(4, c, 0.9);
      const auto sq = kernel::squared_distance_grad(x, y, ball);
      const auto d = kernel::distance_grad(x, y, ball);
      auto sq_x = [&](const Vector& p) { return std::pow(kernel::distance(p, y, ball), 2); };
      auto sq_y = [&](const Vector& p) { return std::pow(kernel::distance(x, p, ball), 2); };
      auto d_x = [&](const Vector& p) { return kernel::distance(p, y, ball); };
      EXPECT_NEAR(sq.value, std::pow(kernel::distance(x, y, ball), 2), 1e-12);
      EXPECT_LT(rel_err(sq.d_x, numeric_grad(sq_x, x)), 1e-7);
      EXPECT_LT(rel_err(sq.d_y, numeric_grad(sq_y, y)), 1e-7);
      EXPECT_LT(rel_err(d.d_x, numeric_grad(d_x, x)), 1e-7);
    }
  }
  // Squared distance is smooth through coincidence: gradient vanishes there.
  const Ball ball(1.0);
  const Vector x = Vector::Constant(3, 0.2);
  EXPECT_EQ(kernel::squared_distance_grad(x, x, ball).d_x.norm(), 0.0);
  EXPECT_EQ(kernel::distance_grad(x, x, ball).d_x.norm(), 0.0);
}
