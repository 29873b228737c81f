#include "geoguide/losses.hpp"

#include "geoguide/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace geoguide {

Vector normalized(const Vector& v, const char* what) {
  const double n = v.norm();
  if (!(n >= kZeroNorm)) throw Error(ErrorCode::ZeroVector, std::string(what) + " has vanishing norm");
  return v / n;
}

Vector normalize_backward(const Vector& v, const Vector& grad_unit) {
  const double n = v.norm();
  const Vector u = v / n;
  return (grad_unit - grad_unit.dot(u) * u) / n;
}

DirectionPair DirectionPair::from_raw(const Vector& delta_image, const Vector& delta_text) {
  if (delta_image.size() != delta_text.size()) {
    throw Error(ErrorCode::DimensionMismatch, "image and text directions differ in length");
  }
  return {normalized(delta_image, "image direction"), normalized(delta_text, "text direction")};
}

LossValue directional_loss(const Vector& delta_image, const Vector& delta_text) {
  if (delta_image.size() != delta_text.size()) {
    throw Error(ErrorCode::DimensionMismatch, "image and text directions differ in length");
  }
  const Vector u = normalized(delta_image, "image direction");
  const Vector v = normalized(delta_text, "text direction");
  LossValue out;
  out.value = 1.0 - u.dot(v);
  out.grad = normalize_backward(delta_image, -v);
  return out;
}

LossValue directional_loss(const DirectionPair& pair) {
  return directional_loss(pair.delta_image, pair.delta_text);
}

LossValue spherical_sq_loss(const Vector& delta_image, const Vector& delta_text, SphericalMode mode) {
  if (delta_image.size() != delta_text.size()) {
    throw Error(ErrorCode::DimensionMismatch, "image and text directions differ in length");
  }
  const Vector u = normalized(delta_image, "image direction");
  const Vector v = normalized(delta_text, "text direction");
  const double c = u.dot(v);
  const double sn = (v - c * u).norm();
  const double theta = std::atan2(sn, c);

  // d(theta^2)/du = -2 theta / sin(theta) * v, with theta/sin(theta) -> 1 at 0.
  double ratio;
  if (sn > 1e-8) {
    ratio = theta / sn;
  } else if (c > 0.0) {
    ratio = 1.0 + theta * theta / 6.0;
  } else {
    ratio = 0.0;  // antipodal: no preferred descent direction
  }
  const double sign = mode == SphericalMode::canonical ? 1.0 : -1.0;
  LossValue out;
  out.value = mode == SphericalMode::canonical ? theta * theta : 1.0 - theta * theta;
  out.grad = normalize_backward(delta_image, (-2.0 * sign * ratio) * v);
  return out;
}

LossValue spherical_sq_loss(const DirectionPair& pair, SphericalMode mode) {
  return spherical_sq_loss(pair.delta_image, pair.delta_text, mode);
}

LossValue imc_loss(const GuidanceMetric& q, const Vector& z_image_i, const Vector& z_image_src,
                   const Vector& text_direction) {
  const Vector raw = z_image_i - z_image_src;
  const Vector di = normalized(raw, "image direction");
  LossValue out;
  out.value = 1.0 - geodesic_cosine(q, di, text_direction);
  out.grad = normalize_backward(raw, -geodesic_cosine_grad(q, di, text_direction));
  return out;
}

LossValue imc_loss(const GuidanceMetric& q, const Vector& z_image_i, const Vector& z_image_src,
                   const Vector& z_text_trg, const Vector& z_text_src) {
  return imc_loss(q, z_image_i, z_image_src, normalized(z_text_trg - z_text_src, "text direction"));
}

LossValue imr_loss(const GuidanceMetric& q, const Vector& z_prev, const Vector& z_curr) {
  const Vector a = normalized(z_prev, "previous feature");
  const Vector b = normalized(z_curr, "current feature");
  LossValue out;
  out.value = 1.0 - geodesic_cosine(q, b, a);
  out.grad = normalize_backward(z_curr, -geodesic_cosine_grad(q, b, a));
  return out;
}

TotalLoss total_loss(const LossValue& inter, const LossValue& intra, const LossValue& perceptual,
                     double lambda1, double lambda2) {
  TotalLoss out;
  out.report.inter_term = inter.value;
  out.report.intra_term = intra.value;
  out.report.perceptual_term = perceptual.value;
  out.report.lambda1 = lambda1;
  out.report.lambda2 = lambda2;
  out.report.total = inter.value + lambda1 * intra.value + lambda2 * perceptual.value;

  const Eigen::Index n = std::max({inter.grad.size(), intra.grad.size(), perceptual.grad.size()});
  out.grad = Vector::Zero(n);
  auto add = [&](const Vector& g, double w) {
    if (g.size() == 0 || w == 0.0) return;
    if (g.size() != n) throw Error(ErrorCode::DimensionMismatch, "loss gradients differ in length");
    out.grad += w * g;
  };
  add(inter.grad, 1.0);
  add(intra.grad, lambda1);
  add(perceptual.grad, lambda2);
  return out;
}

GradientCheckRecord check_gradient(const std::function<LossValue(const Vector&)>& loss_fn,
                                   const Vector& point, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::OutOfRange, "finite-difference step must be positive");
  GradientCheckRecord rec;
  rec.analytic = loss_fn(point).grad;
  rec.numeric = Vector::Zero(point.size());
  Vector x = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double orig = x(i);
    x(i) = orig + step;
    const double up = loss_fn(x).value;
    x(i) = orig - step;
    const double down = loss_fn(x).value;
    x(i) = orig;
    rec.numeric(i) = (up - down) / (2.0 * step);
  }
  if (rec.analytic.size() != rec.numeric.size()) {
    throw Error(ErrorCode::DimensionMismatch, "analytic gradient has the wrong length");
  }
  const double denom = std::max({rec.analytic.norm(), rec.numeric.norm(), 1e-12});
  rec.relative_error = (rec.analytic - rec.numeric).norm() / denom;
  return rec;
}

}  // namespace geoguide
