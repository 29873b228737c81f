#pragma once

#include "geoguide/geodesic.hpp"
#include "geoguide/linalg.hpp"

#include <functional>

namespace geoguide {

/// A scalar loss and its gradient with respect to one input vector.
struct LossValue {
  double value = 0.0;
  Vector grad;
};

/// Norm below which a direction is treated as zero.
inline constexpr double kZeroNorm = 1e-12;

/// Unit vector v / |v|; throws ZeroVector when |v| < kZeroNorm.
Vector normalized(const Vector& v, const char* what);

/// Pulls a cotangent of normalized(v) back to v.
Vector normalize_backward(const Vector& v, const Vector& grad_unit);

/// Unit image and text directions (target minus source).
struct DirectionPair {
  Vector delta_image;
  Vector delta_text;

  /// Normalizes raw differences; throws ZeroVector for a vanishing delta.
  static DirectionPair from_raw(const Vector& delta_image, const Vector& delta_text);
};

/// 1 - cos(delta_image, delta_text). The gradient is taken with respect to
/// the raw (unnormalized) delta_image.
LossValue directional_loss(const Vector& delta_image, const Vector& delta_text);
LossValue directional_loss(const DirectionPair& pair);

enum class SphericalMode {
  canonical,  // arccos^2(<u, v>)
  literal,    // 1 - arccos^2(<u, v>), as printed
};

LossValue spherical_sq_loss(const Vector& delta_image, const Vector& delta_text,
                            SphericalMode mode = SphericalMode::canonical);
LossValue spherical_sq_loss(const DirectionPair& pair, SphericalMode mode = SphericalMode::canonical);

/// Inter-modality consistency: 1 - geodesic_cosine(Q, dI, dT) where
/// dI = normalized(z_image_i - z_image_src) and
/// dT = normalized(z_text_trg - z_text_src). Gradient is with respect to
/// z_image_i; Q is held constant.
LossValue imc_loss(const GuidanceMetric& q, const Vector& z_image_i, const Vector& z_image_src,
                   const Vector& z_text_trg, const Vector& z_text_src);

/// Same loss with a precomputed unit text direction.
LossValue imc_loss(const GuidanceMetric& q, const Vector& z_image_i, const Vector& z_image_src,
                   const Vector& text_direction);

/// Intra-modality regularization: 1 - geodesic_cosine(Q, z_prev/|z_prev|,
/// z_curr/|z_curr|). Gradient is with respect to z_curr.
LossValue imr_loss(const GuidanceMetric& q, const Vector& z_prev, const Vector& z_curr);

struct LossReport {
  double total = 0.0;
  double inter_term = 0.0;
  double intra_term = 0.0;
  double perceptual_term = 0.0;
  double lambda1 = 1.0;
  double lambda2 = 0.3;
};

inline constexpr double kDefaultLambda1 = 1.0;
inline constexpr double kDefaultLambda2 = 0.3;

struct TotalLoss {
  LossReport report;
  Vector grad;
};

/// inter + lambda1 * intra + lambda2 * perceptual, with gradients combined
/// the same way. All three gradients must share one length; an empty
/// gradient counts as zero.
TotalLoss total_loss(const LossValue& inter, const LossValue& intra, const LossValue& perceptual,
                     double lambda1 = kDefaultLambda1, double lambda2 = kDefaultLambda2);

struct GradientCheckRecord {
  Vector analytic;
  Vector numeric;
  double relative_error = 0.0;
};

/// Central finite differences of loss_fn at point, one coordinate at a time.
GradientCheckRecord check_gradient(const std::function<LossValue(const Vector&)>& loss_fn,
                                   const Vector& point, double step);

}  // namespace geoguide
