#include "geoguide/error.hpp"
#include "geoguide/losses.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace geoguide;

namespace {

Vector axis(Eigen::Index d, Eigen::Index i) { return Vector::Unit(d, i); }

GuidanceMetric random_metric(Rng& rng, Eigen::Index d, Eigen::Index k) {
  return q_matrix(geodesic_flow(SubspaceBasis(oracle::random_orthonormal(rng, d, k)),
                                SubspaceBasis(oracle::random_orthonormal(rng, d, k))));
}

double fd_error(const std::function<LossValue(const Vector&)>& fn, const Vector& x) {
  const Vector num = oracle::numeric_gradient([&](const Vector& v) { return fn(v).value; }, x, 1e-6);
  return oracle::relative_error(fn(x).grad, num);
}

}  // namespace

TEST(DirectionalLoss, ReferenceValues) {
  const Vector t = axis(3, 0);
  EXPECT_NEAR(directional_loss(t, t).value, 0.0, 1e-15);
  EXPECT_NEAR(directional_loss(-t, t).value, 2.0, 1e-15);
  EXPECT_NEAR(directional_loss(axis(3, 1), t).value, 1.0, 1e-15);
  EXPECT_NEAR(directional_loss(DirectionPair::from_raw(3.0 * t, 0.5 * t)).value, 0.0, 1e-15);
}

TEST(DirectionalLoss, ZeroDeltaRejected) {
  try {
    directional_loss(Vector::Zero(3), axis(3, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(SphericalLoss, ReferenceValues) {
  const Vector t = axis(4, 2);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(spherical_sq_loss(t, t).value, 0.0, 1e-15);
  EXPECT_NEAR(spherical_sq_loss(-t, t).value, pi2, 1e-12);
  EXPECT_NEAR(spherical_sq_loss(t, t, SphericalMode::literal).value, 1.0, 1e-15);
  EXPECT_NEAR(spherical_sq_loss(axis(4, 0), t).value, pi2 / 4, 1e-12);
}

TEST(ImcLoss, FullSpaceMetricAlignedIsZero) {
  const GuidanceMetric q(Matrix::Identity(4, 4), 4, 4);
  Vector zs = axis(4, 0), zt_src = axis(4, 1), zt_trg = axis(4, 1) + axis(4, 2);
  Vector zi = zs + 2.0 * axis(4, 2);
  EXPECT_NEAR(imc_loss(q, zi, zs, zt_trg, zt_src).value, 0.0, 1e-15);
}

TEST(ImcLoss, SameSubspacesEqualDirectionalOnProjections) {
  Rng rng(2);
  const Matrix b = oracle::random_orthonormal(rng, 8, 3);
  const GuidanceMetric q = q_matrix(geodesic_flow(SubspaceBasis(b), SubspaceBasis(b)));
  const Matrix proj = b * b.transpose();
  for (int trial = 0; trial < 20; ++trial) {
    const Vector zi = oracle::random_vector(rng, 8), zs = oracle::random_vector(rng, 8);
    const Vector tt = oracle::random_vector(rng, 8), ts = oracle::random_vector(rng, 8);
    const Vector di = (zi - zs).normalized(), dt = (tt - ts).normalized();
    const double want = directional_loss(proj * di, proj * dt).value;
    EXPECT_NEAR(imc_loss(q, zi, zs, tt, ts).value, want, 1e-9);
  }
}

TEST(ImcLoss, MatchesQuadratureMetric) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const GeodesicFlow f = geodesic_flow(SubspaceBasis(oracle::random_orthonormal(rng, 8, 3)),
                                         SubspaceBasis(oracle::random_orthonormal(rng, 8, 3)));
    const Matrix qref = oracle::trapezoid_q(f, 10000);
    const Vector zi = oracle::random_vector(rng, 8), zs = oracle::random_vector(rng, 8);
    const Vector dt = oracle::random_vector(rng, 8).normalized();
    const Vector di = (zi - zs).normalized();
    const double want = 1.0 - di.dot(qref * dt) / std::sqrt(di.dot(qref * di) * dt.dot(qref * dt));
    EXPECT_NEAR(imc_loss(q_matrix(f), zi, zs, dt).value, want, 1e-6);
  }
}

TEST(ImrLoss, ReferenceValues) {
  Rng rng(4);
  const Matrix b = oracle::random_orthonormal(rng, 6, 2);
  const GuidanceMetric q = q_matrix(geodesic_flow(SubspaceBasis(b), SubspaceBasis(b)));
  const Vector z = b.col(0) * 3.0;
  EXPECT_NEAR(imr_loss(q, z, z).value, 0.0, 1e-12);
  EXPECT_NEAR(imr_loss(q, b.col(0), 5.0 * b.col(1)).value, 1.0, 1e-12);
}

TEST(ImrLoss, MatchesQuadratureMetric) {
  Rng rng(5);
  const GeodesicFlow f = geodesic_flow(SubspaceBasis(oracle::random_orthonormal(rng, 7, 2)),
                                       SubspaceBasis(oracle::random_orthonormal(rng, 7, 2)));
  const Matrix qref = oracle::trapezoid_q(f, 10000);
  const Vector a = oracle::random_vector(rng, 7).normalized(), b = oracle::random_vector(rng, 7).normalized();
  const double want = 1.0 - a.dot(qref * b) / std::sqrt(a.dot(qref * a) * b.dot(qref * b));
  EXPECT_NEAR(imr_loss(q_matrix(f), 2.0 * a, 0.5 * b).value, want, 1e-6);
}

TEST(Losses, ScaleInvariance) {
  Rng rng(6);
  const GuidanceMetric q = random_metric(rng, 8, 3);
  const Vector zi = oracle::random_vector(rng, 8), zs = oracle::random_vector(rng, 8);
  const Vector t = oracle::random_vector(rng, 8);
  for (double c : {0.01, 7.0}) {
    EXPECT_NEAR(directional_loss(c * (zi - zs), t).value, directional_loss(zi - zs, t).value, 1e-10);
    EXPECT_NEAR(imr_loss(q, zs, c * zi).value, imr_loss(q, zs, zi).value, 1e-10);
    EXPECT_NEAR(imc_loss(q, c * zi, c * zs, t.normalized()).value, imc_loss(q, zi, zs, t.normalized()).value, 1e-10);
  }
}

TEST(Losses, RangesOnRandomInputs) {
  Rng rng(7);
  const GuidanceMetric q = random_metric(rng, 6, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector a = oracle::random_vector(rng, 6), b = oracle::random_vector(rng, 6);
    const double d = directional_loss(a, b).value;
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0);
    const double g = imr_loss(q, a, b).value;
    EXPECT_GE(g, -1e-12);
    EXPECT_LE(g, 2.0 + 1e-12);
    EXPECT_GE(spherical_sq_loss(a, b).value, 0.0);
  }
}

TEST(Gradients, EveryLossPassesFiniteDifferences) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const GuidanceMetric q = random_metric(rng, 8, 3);
    const Vector zs = oracle::random_vector(rng, 8), t = oracle::random_vector(rng, 8).normalized();
    const Vector x = oracle::random_vector(rng, 8);
    EXPECT_LE(fd_error([&](const Vector& v) { return directional_loss(v, t); }, x), 1e-5);
    EXPECT_LE(fd_error([&](const Vector& v) { return spherical_sq_loss(v, t); }, x), 1e-5);
    EXPECT_LE(fd_error([&](const Vector& v) { return spherical_sq_loss(v, t, SphericalMode::literal); }, x), 1e-5);
    EXPECT_LE(fd_error([&](const Vector& v) { return imc_loss(q, v, zs, t); }, x), 1e-5);
    EXPECT_LE(fd_error([&](const Vector& v) { return imr_loss(q, zs, v); }, x), 1e-5);
  }
}

TEST(Gradients, SphericalNearAlignment) {
  const Vector t = axis(3, 0);
  Vector x = t;
  x(1) = 1e-4;
  EXPECT_LE(fd_error([&](const Vector& v) { return spherical_sq_loss(v, t); }, x), 1e-5);
}

TEST(TotalLoss, WeightedSum) {
  const TotalLoss t = total_loss({0.4, {}}, {0.2, {}}, {0.1, {}});
  EXPECT_NEAR(t.report.total, 0.63, 1e-15);
  EXPECT_DOUBLE_EQ(t.report.lambda1, 1.0);
  EXPECT_DOUBLE_EQ(t.report.lambda2, 0.3);
  EXPECT_EQ(total_loss({}, {}, {}).report.total, 0.0);
}

TEST(TotalLoss, LinearInGradientsAndZeroLambdaIgnoresTerm) {
  Rng rng(9);
  const Vector a = oracle::random_vector(rng, 5), b = oracle::random_vector(rng, 5), c = oracle::random_vector(rng, 5);
  const TotalLoss t = total_loss({1.0, a}, {2.0, b}, {3.0, c}, 0.5, 0.0);
  EXPECT_NEAR(t.report.total, 2.0, 1e-15);
  EXPECT_LE((t.grad - (a + 0.5 * b)).norm(), 1e-15);
  const auto& r = t.report;
  EXPECT_NEAR(r.total, r.inter_term + r.lambda1 * r.intra_term + r.lambda2 * r.perceptual_term, 1e-12);
}

TEST(CheckGradient, RecordsAndConstantFunction) {
  Rng rng(10);
  const Vector t = oracle::random_vector(rng, 6).normalized();
  const Vector x = oracle::random_vector(rng, 6);
  const GradientCheckRecord r = check_gradient([&](const Vector& v) { return directional_loss(v, t); }, x, 1e-6);
  EXPECT_LE(r.relative_error, 1e-5);
  const GradientCheckRecord flat =
      check_gradient([](const Vector& v) { return LossValue{3.0, Vector::Zero(v.size())}; }, x, 1e-6);
  EXPECT_LE(flat.numeric.norm(), 1e-12);
  EXPECT_LE(flat.relative_error, 1e-12);
}

TEST(NormalizeBackward, MatchesFiniteDifferences) {
  Rng rng(11);
  const Vector v = oracle::random_vector(rng, 5), w = oracle::random_vector(rng, 5);
  const Vector num = oracle::numeric_gradient([&](const Vector& x) { return w.dot(x.normalized()); }, v, 1e-6);
  EXPECT_LE(oracle::relative_error(normalize_backward(v, w), num), 1e-7);
}
