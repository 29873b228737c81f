#pragma once

#include "geoguide/linalg.hpp"

#include <cstddef>
#include <vector>

namespace geoguide {

/// Principal angles between span(p) and span(q), ascending in [0, pi/2].
/// Returns min(dim p, dim q) angles. Angles come from the singular values of
/// the cross-Gram matrix; small angles are read from the sines instead of
/// the cosines so they keep full relative precision.
std::vector<double> principal_angles(const SubspaceBasis& p, const SubspaceBasis& q);

/// Closed-form geodesic on G(k, D) from span(p_t) to span(p_next).
///
/// With A = p_t^T p_next = U1 diag(cos theta) V^T and R the complement of
/// p_t, the construction guarantees R^T p_next = -U2 diag(sin theta) V^T, so
///   Pi(nu) = p_t U1 cos(theta nu) - R U2 sin(theta nu)
/// starts at span(p_t) and ends at span(p_next).
struct GeodesicFlow {
  SubspaceBasis p_t;
  SubspaceBasis p_next;
  SubspaceBasis complement_r;
  Matrix u1;  // k x k
  Matrix u2;  // (D-k) x k
  Matrix v;   // k x k
  std::vector<double> angles;  // ascending

  std::size_t ambient_dim() const noexcept { return p_t.ambient_dim(); }
  std::size_t sub_dim() const noexcept { return p_t.sub_dim(); }
};

GeodesicFlow geodesic_flow(const SubspaceBasis& p_t, const SubspaceBasis& p_next);

/// Residuals ||p_t^T p_next - U1 Gamma V^T||_F and
/// ||R^T p_next + U2 Sigma V^T||_F, recomputed from scratch.
struct FlowResiduals {
  double cosine_part = 0.0;
  double sine_part = 0.0;
};
FlowResiduals flow_residuals(const GeodesicFlow& f);

/// Pi(nu) for nu in [0, 1]; throws OutOfRange otherwise.
SubspaceBasis evaluate_flow(const GeodesicFlow& f, double nu);

/// Symmetric PSD D x D matrix defining the intermediate-subspace inner
/// product z_a^T Q z_b.
class GuidanceMetric {
public:
  GuidanceMetric() = default;
  GuidanceMetric(Matrix q, std::size_t source_dim, std::size_t target_dim);

  const Matrix& q() const noexcept { return q_; }
  std::size_t ambient_dim() const noexcept { return static_cast<std::size_t>(q_.rows()); }
  std::size_t source_dim() const noexcept { return source_dim_; }
  std::size_t target_dim() const noexcept { return target_dim_; }
  /// Smallest eigenvalue, computed once at construction.
  double eigen_floor() const noexcept { return eigen_floor_; }

private:
  Matrix q_;
  std::size_t source_dim_ = 0;
  std::size_t target_dim_ = 0;
  double eigen_floor_ = 0.0;
};

/// Integrals over nu in [0, 1] of cos^2(theta nu), -cos(theta nu) sin(theta nu)
/// and sin^2(theta nu).
struct AngleWeights {
  double q1;
  double q2;
  double q3;
};
AngleWeights angle_weights(double theta);

/// Q = int_0^1 Pi(nu) Pi(nu)^T dnu in closed form.
GuidanceMetric q_matrix(const GeodesicFlow& f);

/// Composite trapezoid estimate of the same integral on `nodes` points.
Matrix q_matrix_trapezoid(const GeodesicFlow& f, std::size_t nodes);

/// Threshold on z^T Q z below which a vector counts as annihilated.
inline constexpr double kProjectionEps = 1e-12;

/// z_a^T Q z_b / (sqrt(z_a^T Q z_a) sqrt(z_b^T Q z_b)).
/// Throws DegenerateProjection when either quadratic form is <= kProjectionEps.
double geodesic_cosine(const GuidanceMetric& q, const Vector& z_a, const Vector& z_b);

/// 1 - geodesic_cosine.
double geodesic_loss(const GuidanceMetric& q, const Vector& z_a, const Vector& z_b);

/// Gradient of geodesic_cosine with respect to z_a.
Vector geodesic_cosine_grad(const GuidanceMetric& q, const Vector& z_a, const Vector& z_b);

/// Q metric between the subspaces spanned by two feature batches.
///
/// Both bases are extracted with extract_subspace(requested_dim), the larger
/// is truncated to the smaller rank, and Q is built along their geodesic.
/// When the common rank equals D the geodesic is the whole space and Q = I.
struct BatchMetric {
  GuidanceMetric metric;
  std::size_t requested_dim = 0;
  std::size_t effective_dim = 0;
};
BatchMetric metric_between_batches(const Matrix& source_batch, const Matrix& target_batch,
                                   std::size_t requested_dim);

}  // namespace geoguide
