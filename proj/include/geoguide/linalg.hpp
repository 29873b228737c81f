#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace geoguide {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Throws NonFinite if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// Thin singular value decomposition a = u * diag(s) * vt.
///
/// For an m x n input, u is m x r, s has r entries and vt is r x n with
/// r = min(m, n). Singular values are sorted descending. Each left singular
/// vector is signed so that its largest-magnitude entry is positive (first
/// such entry on ties); the matching row of vt is flipped with it.
struct SvdResult {
  Matrix u;
  Vector s;
  Matrix vt;
};

/// Maximum number of one-sided Jacobi sweeps before NonConvergence.
inline constexpr int kSvdMaxSweeps = 80;

SvdResult svd(const Matrix& a);

/// A k-dimensional linear subspace of R^D stored as a D x k matrix with
/// orthonormal columns.
class SubspaceBasis {
public:
  /// Tolerance on ||B^T B - I||_F accepted by the constructor.
  static constexpr double kOrthonormalTol = 1e-8;

  SubspaceBasis() = default;
  /// Validates orthonormality; throws NonFinite / DimensionMismatch.
  explicit SubspaceBasis(Matrix basis);

  std::size_t ambient_dim() const noexcept { return static_cast<std::size_t>(basis_.rows()); }
  std::size_t sub_dim() const noexcept { return static_cast<std::size_t>(basis_.cols()); }
  const Matrix& basis() const noexcept { return basis_; }

  /// Orthogonal projector B B^T (D x D).
  Matrix projector() const { return basis_ * basis_.transpose(); }

  /// First `k` columns as a new basis.
  SubspaceBasis truncated(std::size_t k) const;

private:
  Matrix basis_;
};

/// Basis of the orthogonal complement; [b | result] is a D x D orthogonal
/// matrix. Throws FullSpace when b already spans R^D.
SubspaceBasis orthonormal_complement(const SubspaceBasis& b);

/// Top right singular directions of the uncentered feature matrix
/// (rows = samples). The result keeps min(target_dim, numeric rank)
/// directions, where numeric rank counts singular values above
/// kRankTol * s_max. Throws ZeroMatrix for an all-zero batch.
inline constexpr double kRankTol = 1e-10;
SubspaceBasis extract_subspace(const Matrix& features, std::size_t target_dim);

/// ||P_a - P_b||_F for the orthogonal projectors of two subspaces.
double projector_distance(const SubspaceBasis& a, const SubspaceBasis& b);

/// ||B^T B - I||_F.
double orthonormality_error(const Matrix& b);

}  // namespace geoguide
