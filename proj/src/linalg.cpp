#include "geoguide/linalg.hpp"

#include "geoguide/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace geoguide {

namespace {

constexpr double kJacobiTol = 1e-15;

// Flip each column of u (and the matching row of vt) so that the
// largest-magnitude entry of the column is positive.
void fix_signs(Matrix& u, Matrix& vt) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (u(best, j) < 0.0) {
      u.col(j) *= -1.0;
      vt.row(j) *= -1.0;
    }
  }
}

// Replaces column `j` of q by a unit vector orthogonal to columns [0, j),
// drawn from the canonical basis in index order.
void complete_column(Matrix& q, Eigen::Index j) {
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    Vector v = Vector::Unit(q.rows(), i);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < j; ++c) v -= q.col(c).dot(v) * q.col(c);
    }
    const double n = v.norm();
    if (n > 0.5) {
      q.col(j) = v / n;
      return;
    }
  }
  q.col(j).setZero();
}

// One-sided (Hestenes) Jacobi on a tall matrix, rows >= cols.
SvdResult jacobi_svd_tall(const Matrix& a) {
  const Eigen::Index n = a.cols();
  Matrix w = a;
  Matrix v = Matrix::Identity(n, n);

  bool converged = false;
  for (int sweep = 0; sweep < kSvdMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Vector wp = w.col(p);
        w.col(p) = c * wp - s * w.col(q);
        w.col(q) = s * wp + c * w.col(q);
        const Vector vp = v.col(p);
        v.col(p) = c * vp - s * v.col(q);
        v.col(q) = s * vp + c * v.col(q);
      }
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NonConvergence,
                "one-sided Jacobi did not converge in " + std::to_string(kSvdMaxSweeps) + " sweeps");
  }

  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) norms[static_cast<std::size_t>(j)] = w.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return norms[static_cast<std::size_t>(x)] > norms[static_cast<std::size_t>(y)];
  });

  SvdResult out;
  out.u.resize(a.rows(), n);
  out.s.resize(n);
  out.vt.resize(n, n);
  const double s_max = n > 0 ? norms[static_cast<std::size_t>(order[0])] : 0.0;
  std::vector<Eigen::Index> to_complete;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    const double sv = norms[static_cast<std::size_t>(src)];
    out.s(j) = sv;
    out.vt.row(j) = v.col(src).transpose();
    if (sv > 0.0 && sv > 1e-14 * s_max) {
      out.u.col(j) = w.col(src) / sv;
    } else {
      to_complete.push_back(j);
    }
  }
  // Null-space columns sit at the end of the descending order.
  for (Eigen::Index j : to_complete) complete_column(out.u, j);
  return out;
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
}

SvdResult svd(const Matrix& a) {
  if (a.rows() < 1 || a.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "svd of an empty matrix");
  require_finite(a, "svd input");
  SvdResult out;
  if (a.rows() >= a.cols()) {
    out = jacobi_svd_tall(a);
  } else {
    SvdResult t = jacobi_svd_tall(a.transpose());
    out.u = t.vt.transpose();
    out.s = std::move(t.s);
    out.vt = t.u.transpose();
  }
  fix_signs(out.u, out.vt);
  return out;
}

SubspaceBasis::SubspaceBasis(Matrix basis) : basis_(std::move(basis)) {
  require_finite(basis_, "subspace basis");
  if (basis_.cols() > basis_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "basis has more columns than rows");
  }
  const double err = orthonormality_error(basis_);
  if (err > kOrthonormalTol) {
    throw Error(ErrorCode::DimensionMismatch,
                "basis columns are not orthonormal (error " + std::to_string(err) + ")");
  }
}

SubspaceBasis SubspaceBasis::truncated(std::size_t k) const {
  if (k > sub_dim()) throw Error(ErrorCode::OutOfRange, "cannot truncate to a larger dimension");
  return SubspaceBasis(basis_.leftCols(static_cast<Eigen::Index>(k)));
}

SubspaceBasis orthonormal_complement(const SubspaceBasis& b) {
  const Eigen::Index d = static_cast<Eigen::Index>(b.ambient_dim());
  const Eigen::Index k = static_cast<Eigen::Index>(b.sub_dim());
  if (k >= d) throw Error(ErrorCode::FullSpace, "subspace spans the whole ambient space");
  if (k == 0) return SubspaceBasis(Matrix::Identity(d, d));
  Eigen::HouseholderQR<Matrix> qr(b.basis());
  Matrix q = qr.householderQ();
  return SubspaceBasis(q.rightCols(d - k));
}

SubspaceBasis extract_subspace(const Matrix& features, std::size_t target_dim) {
  if (features.rows() < 1 || features.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "feature batch is empty");
  }
  if (target_dim < 1 || target_dim > static_cast<std::size_t>(features.cols())) {
    throw Error(ErrorCode::OutOfRange, "target_dim must lie in [1, D]");
  }
  const SvdResult dec = svd(features);
  const double s_max = dec.s(0);
  if (!(s_max > 1e-300)) throw Error(ErrorCode::ZeroMatrix, "all features are numerically zero");
  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(dec.s.size()) && dec.s(static_cast<Eigen::Index>(rank)) > kRankTol * s_max) {
    ++rank;
  }
  const auto k = static_cast<Eigen::Index>(std::min(target_dim, rank));
  return SubspaceBasis(dec.vt.topRows(k).transpose());
}

double projector_distance(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "projector_distance across ambient dimensions");
  }
  return (a.projector() - b.projector()).norm();
}

double orthonormality_error(const Matrix& b) {
  return (b.transpose() * b - Matrix::Identity(b.cols(), b.cols())).norm();
}

}  // namespace geoguide
