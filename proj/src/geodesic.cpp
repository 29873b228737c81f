#include "geoguide/geodesic.hpp"

#include "geoguide/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace geoguide {

namespace {

void require_same_ambient(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "ambient dimensions differ: " + std::to_string(a.ambient_dim()) + " vs " +
                    std::to_string(b.ambient_dim()));
  }
}

// Below this sine a column of U2 is not determined by R^T p_next.
constexpr double kSineFloor = 1e-14;

// Orthogonalizes v against the listed columns of m (two passes of modified
// Gram-Schmidt) and returns its remaining norm.
double orthogonalize(Vector& v, const Matrix& m, const std::vector<Eigen::Index>& cols) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index c : cols) v -= m.col(c).dot(v) * m.col(c);
  }
  return v.norm();
}

}  // namespace

std::vector<double> principal_angles(const SubspaceBasis& p, const SubspaceBasis& q) {
  require_same_ambient(p, q);
  const SubspaceBasis& big = p.sub_dim() >= q.sub_dim() ? p : q;
  const SubspaceBasis& small = p.sub_dim() >= q.sub_dim() ? q : p;
  const auto m = static_cast<Eigen::Index>(small.sub_dim());
  if (m == 0) return {};

  const Matrix cross = big.basis().transpose() * small.basis();
  const Vector cosines = svd(cross).s;  // descending, length m
  const Matrix residual = small.basis() - big.basis() * cross;
  const Vector sines = svd(residual).s;  // descending, length m

  std::vector<double> angles(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double c = std::clamp(cosines(i), -1.0, 1.0);
    const double s = std::clamp(sines(m - 1 - i), 0.0, 1.0);
    angles[static_cast<std::size_t>(i)] = c * c >= 0.5 ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

GeodesicFlow geodesic_flow(const SubspaceBasis& p_t, const SubspaceBasis& p_next) {
  require_same_ambient(p_t, p_next);
  if (p_t.sub_dim() != p_next.sub_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "subspace dimensions differ: " + std::to_string(p_t.sub_dim()) + " vs " +
                    std::to_string(p_next.sub_dim()));
  }
  if (p_t.sub_dim() == 0) throw Error(ErrorCode::DimensionMismatch, "empty subspace");

  SubspaceBasis r = orthonormal_complement(p_t);  // FullSpace when k == D
  const auto k = static_cast<Eigen::Index>(p_t.sub_dim());
  const auto rc = static_cast<Eigen::Index>(r.sub_dim());

  const Matrix a = p_t.basis().transpose() * p_next.basis();
  const SvdResult dec = svd(a);
  const Matrix v = dec.vt.transpose();
  const Matrix bv = r.basis().transpose() * p_next.basis() * v;

  std::vector<double> sines(static_cast<std::size_t>(k));
  std::vector<double> angles(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    sines[static_cast<std::size_t>(i)] = bv.col(i).norm();
    angles[static_cast<std::size_t>(i)] = std::atan2(sines[static_cast<std::size_t>(i)], dec.s(i));
  }

  // U2 columns are -BV_i / sin(theta_i), re-orthonormalized in order of
  // decreasing sine; undetermined columns are completed from the canonical
  // basis while room remains in R^(D-k), and left zero afterwards.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return sines[static_cast<std::size_t>(x)] > sines[static_cast<std::size_t>(y)];
  });
  Matrix u2 = Matrix::Zero(rc, k);
  std::vector<Eigen::Index> filled;
  std::vector<Eigen::Index> pending;
  for (Eigen::Index i : order) {
    const double s = sines[static_cast<std::size_t>(i)];
    if (s > kSineFloor) {
      Vector col = -bv.col(i) / s;
      const double n = orthogonalize(col, u2, filled);
      if (n > 0.5) {
        u2.col(i) = col / n;
        filled.push_back(i);
        continue;
      }
    }
    pending.push_back(i);
  }
  for (Eigen::Index i : pending) {
    if (static_cast<Eigen::Index>(filled.size()) >= rc) break;
    for (Eigen::Index e = 0; e < rc; ++e) {
      Vector col = Vector::Unit(rc, e);
      const double n = orthogonalize(col, u2, filled);
      if (n > 0.5) {
        u2.col(i) = col / n;
        filled.push_back(i);
        break;
      }
    }
  }

  GeodesicFlow f{p_t, p_next, std::move(r), dec.u, std::move(u2), v, std::move(angles)};
  return f;
}

FlowResiduals flow_residuals(const GeodesicFlow& f) {
  const auto k = static_cast<Eigen::Index>(f.sub_dim());
  Vector cosines(k);
  Vector sines(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    cosines(i) = std::cos(f.angles[static_cast<std::size_t>(i)]);
    sines(i) = std::sin(f.angles[static_cast<std::size_t>(i)]);
  }
  FlowResiduals out;
  out.cosine_part = (f.p_t.basis().transpose() * f.p_next.basis() -
                     f.u1 * cosines.asDiagonal() * f.v.transpose())
                        .norm();
  out.sine_part = (f.complement_r.basis().transpose() * f.p_next.basis() +
                   f.u2 * sines.asDiagonal() * f.v.transpose())
                      .norm();
  return out;
}

SubspaceBasis evaluate_flow(const GeodesicFlow& f, double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "nu must lie in [0, 1], got " + std::to_string(nu));
  }
  const auto k = static_cast<Eigen::Index>(f.sub_dim());
  Vector c(k);
  Vector s(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double t = f.angles[static_cast<std::size_t>(i)] * nu;
    c(i) = std::cos(t);
    s(i) = std::sin(t);
  }
  Matrix pi = f.p_t.basis() * (f.u1 * c.asDiagonal()) -
              f.complement_r.basis() * (f.u2 * s.asDiagonal());
  return SubspaceBasis(std::move(pi));
}

GuidanceMetric::GuidanceMetric(Matrix q, std::size_t source_dim, std::size_t target_dim)
    : source_dim_(source_dim), target_dim_(target_dim) {
  if (q.rows() != q.cols()) throw Error(ErrorCode::DimensionMismatch, "Q must be square");
  require_finite(q, "guidance metric");
  q_ = 0.5 * (q + q.transpose());
  if (q_.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q_, Eigen::EigenvaluesOnly);
    eigen_floor_ = eig.eigenvalues().minCoeff();
  }
}

AngleWeights angle_weights(double theta) {
  if (theta == 0.0) return {1.0, 0.0, 0.0};
  // 1 - sin(x)/x with x = 2 theta, by series where the closed form cancels.
  const double x = 2.0 * theta;
  double one_minus_sinc;
  if (std::abs(x) < 2e-2) {
    const double x2 = x * x;
    one_minus_sinc = x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
  } else {
    one_minus_sinc = 1.0 - std::sin(x) / x;
  }
  const double sn = std::sin(theta);
  return {1.0 - 0.5 * one_minus_sinc, -sn * sn / (2.0 * theta), 0.5 * one_minus_sinc};
}

GuidanceMetric q_matrix(const GeodesicFlow& f) {
  const auto k = static_cast<Eigen::Index>(f.sub_dim());
  Vector w1(k), w2(k), w3(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const AngleWeights w = angle_weights(f.angles[static_cast<std::size_t>(i)]);
    w1(i) = w.q1;
    w2(i) = w.q2;
    w3(i) = w.q3;
  }
  const Matrix a1 = f.p_t.basis() * f.u1;
  const Matrix a2 = f.complement_r.basis() * f.u2;
  const Matrix cross = a1 * w2.asDiagonal() * a2.transpose();
  Matrix q = a1 * w1.asDiagonal() * a1.transpose() + cross + cross.transpose() +
             a2 * w3.asDiagonal() * a2.transpose();
  return GuidanceMetric(std::move(q), f.sub_dim(), f.p_next.sub_dim());
}

Matrix q_matrix_trapezoid(const GeodesicFlow& f, std::size_t nodes) {
  if (nodes < 2) throw Error(ErrorCode::OutOfRange, "trapezoid rule needs at least two nodes");
  const auto d = static_cast<Eigen::Index>(f.ambient_dim());
  Matrix acc = Matrix::Zero(d, d);
  const double h = 1.0 / static_cast<double>(nodes - 1);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double nu = std::min(1.0, static_cast<double>(i) * h);
    const double w = (i == 0 || i + 1 == nodes) ? 0.5 * h : h;
    const Matrix pi = evaluate_flow(f, nu).basis();
    acc.selfadjointView<Eigen::Lower>().rankUpdate(pi, w);
  }
  return Matrix(acc.selfadjointView<Eigen::Lower>());
}

double geodesic_cosine(const GuidanceMetric& q, const Vector& z_a, const Vector& z_b) {
  const auto d = static_cast<Eigen::Index>(q.ambient_dim());
  if (z_a.size() != d || z_b.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "feature dimension does not match Q");
  }
  const Vector qa = q.q() * z_a;
  const Vector qb = q.q() * z_b;
  const double alpha = z_a.dot(qa);
  const double beta = z_b.dot(qb);
  if (!(alpha > kProjectionEps) || !(beta > kProjectionEps)) {
    throw Error(ErrorCode::DegenerateProjection, "feature is annihilated by Q");
  }
  return z_a.dot(qb) / (std::sqrt(alpha) * std::sqrt(beta));
}

double geodesic_loss(const GuidanceMetric& q, const Vector& z_a, const Vector& z_b) {
  return 1.0 - geodesic_cosine(q, z_a, z_b);
}

Vector geodesic_cosine_grad(const GuidanceMetric& q, const Vector& z_a, const Vector& z_b) {
  const double c = geodesic_cosine(q, z_a, z_b);
  const Vector qa = q.q() * z_a;
  const Vector qb = q.q() * z_b;
  const double alpha = z_a.dot(qa);
  const double beta = z_b.dot(qb);
  return qb / (std::sqrt(alpha) * std::sqrt(beta)) - (c / alpha) * qa;
}

BatchMetric metric_between_batches(const Matrix& source_batch, const Matrix& target_batch,
                                   std::size_t requested_dim) {
  if (source_batch.cols() != target_batch.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "feature batches have different widths");
  }
  const auto d = static_cast<std::size_t>(source_batch.cols());
  const std::size_t dim = std::clamp<std::size_t>(requested_dim, 1, std::max<std::size_t>(d, 1));
  const SubspaceBasis ps = extract_subspace(source_batch, dim);
  const SubspaceBasis pt = extract_subspace(target_batch, dim);
  const std::size_t r = std::min(ps.sub_dim(), pt.sub_dim());

  BatchMetric out;
  out.requested_dim = requested_dim;
  out.effective_dim = r;
  if (r == d) {
    out.metric = GuidanceMetric(Matrix::Identity(source_batch.cols(), source_batch.cols()), r, r);
    return out;
  }
  out.metric = q_matrix(geodesic_flow(ps.truncated(r), pt.truncated(r)));
  return out;
}

}  // namespace geoguide
