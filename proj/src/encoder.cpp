#include "geoguide/encoder.hpp"

#include "geoguide/error.hpp"
#include "geoguide/random.hpp"

#include <cmath>
#include <string>

namespace geoguide {

namespace {

constexpr double kActivationFloor = 1e-12;

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal() * scale;
  }
  return m;
}

Vector hidden(const ToyEncoder& e, const Vector& x) {
  return e.has_hidden_layer() ? Vector((e.hidden_weight * x).array().tanh()) : x;
}

void require_input(const ToyEncoder& e, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != e.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "encoder expects input of length " +
                                                  std::to_string(e.input_dim()) + ", got " +
                                                  std::to_string(x.size()));
  }
}

// Source pixel index for every destination pixel, or -1 for zero fill.
std::vector<Eigen::Index> source_map(const AugmentationOp& op, int h, int w, int c) {
  std::vector<Eigen::Index> src(static_cast<std::size_t>(h) * w * c, -1);
  auto idx = [&](int y, int x, int ch) { return (static_cast<Eigen::Index>(y) * w + x) * c + ch; };
  switch (op.kind) {
    case AugmentationKind::roll:
      for (int y = 0; y < h; ++y) {
        const int sy = ((y - op.dy) % h + h) % h;
        for (int x = 0; x < w; ++x) {
          const int sx = ((x - op.dx) % w + w) % w;
          for (int ch = 0; ch < c; ++ch) src[static_cast<std::size_t>(idx(y, x, ch))] = idx(sy, sx, ch);
        }
      }
      break;
    case AugmentationKind::crop_pad: {
      if (op.box_h < 1 || op.box_w < 1 || op.top < 0 || op.left < 0 || op.top + op.box_h > h ||
          op.left + op.box_w > w) {
        throw Error(ErrorCode::BoxOutOfBounds, "crop box does not fit inside the image");
      }
      const int oy = (h - op.box_h) / 2;
      const int ox = (w - op.box_w) / 2;
      for (int i = 0; i < op.box_h; ++i) {
        for (int j = 0; j < op.box_w; ++j) {
          for (int ch = 0; ch < c; ++ch) {
            src[static_cast<std::size_t>(idx(oy + i, ox + j, ch))] = idx(op.top + i, op.left + j, ch);
          }
        }
      }
      break;
    }
    case AugmentationKind::horizontal_flip:
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          for (int ch = 0; ch < c; ++ch) src[static_cast<std::size_t>(idx(y, x, ch))] = idx(y, w - 1 - x, ch);
        }
      }
      break;
  }
  return src;
}

bool is_identity(const AugmentationOp& op, int h, int w) {
  switch (op.kind) {
    case AugmentationKind::roll: return op.dy % h == 0 && op.dx % w == 0;
    case AugmentationKind::crop_pad: return op.box_h == h && op.box_w == w;
    case AugmentationKind::horizontal_flip: return w == 1;
  }
  return false;
}

}  // namespace

ToyEncoder make_encoder(EncoderKind kind, std::size_t input_dim, std::size_t output_dim,
                        std::uint64_t seed, std::size_t hidden_dim) {
  if (input_dim < 1 || output_dim < 1) throw Error(ErrorCode::DimensionMismatch, "encoder dims must be >= 1");
  Rng rng(seed);
  ToyEncoder e;
  e.kind = kind;
  e.seed = seed;
  if (hidden_dim > 0) {
    e.hidden_weight = gaussian_matrix(rng, hidden_dim, input_dim);
    e.weight = gaussian_matrix(rng, output_dim, hidden_dim);
  } else {
    e.weight = gaussian_matrix(rng, output_dim, input_dim);
  }
  return e;
}

ToyEncoder make_linear_encoder(EncoderKind kind, Matrix weight) {
  require_finite(weight, "encoder weight");
  ToyEncoder e;
  e.kind = kind;
  e.weight = std::move(weight);
  return e;
}

Vector encode(const ToyEncoder& e, const Vector& x) {
  require_input(e, x);
  const Vector y = e.weight * hidden(e, x);
  const double n = y.norm();
  if (!(n >= kActivationFloor)) throw Error(ErrorCode::ZeroActivation, "encoder activation vanished");
  return y / n;
}

Vector encode_backward(const ToyEncoder& e, const Vector& x, const Vector& grad_z) {
  require_input(e, x);
  const Vector h = hidden(e, x);
  const Vector y = e.weight * h;
  const double n = y.norm();
  if (!(n >= kActivationFloor)) throw Error(ErrorCode::ZeroActivation, "encoder activation vanished");
  const Vector z = y / n;
  const Vector grad_y = (grad_z - grad_z.dot(z) * z) / n;
  Vector grad_h = e.weight.transpose() * grad_y;
  if (!e.has_hidden_layer()) return grad_h;
  grad_h.array() *= 1.0 - h.array().square();
  return e.hidden_weight.transpose() * grad_h;
}

Vector prompt_vector(std::string_view prompt, std::size_t dim) {
  if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "prompt dimension must be >= 1");
  const std::uint64_t h = fnv1a(prompt);
  Rng rng(h);
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 0.1 * rng.normal();
  v(static_cast<Eigen::Index>(h % dim)) += 1.0;
  return v;
}

Vector encode_prompt(const ToyEncoder& e, std::string_view prompt) {
  return encode(e, prompt_vector(prompt, e.input_dim()));
}

ImageTensor apply_augmentation(const AugmentationOp& op, const ImageTensor& x) {
  const auto src = source_map(op, x.height, x.width, x.channels);
  ImageTensor out(x.height, x.width, x.channels);
  for (std::size_t d = 0; d < src.size(); ++d) {
    if (src[d] >= 0) out.pixels(static_cast<Eigen::Index>(d)) = x.pixels(src[d]);
  }
  return out;
}

ImageTensor apply_adjoint(const AugmentationOp& op, const ImageTensor& y) {
  const auto src = source_map(op, y.height, y.width, y.channels);
  ImageTensor out(y.height, y.width, y.channels);
  for (std::size_t d = 0; d < src.size(); ++d) {
    if (src[d] >= 0) out.pixels(src[d]) += y.pixels(static_cast<Eigen::Index>(d));
  }
  return out;
}

ImageTensor apply_augmentation(const Augmentation& chain, const ImageTensor& x) {
  ImageTensor out = x;
  for (const AugmentationOp& op : chain) out = apply_augmentation(op, out);
  return out;
}

ImageTensor apply_adjoint(const Augmentation& chain, const ImageTensor& y) {
  ImageTensor out = y;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) out = apply_adjoint(*it, out);
  return out;
}

std::vector<Augmentation> sample_augmentations(std::uint64_t seed, std::size_t count, int height,
                                               int width) {
  if (height < 1 || width < 1) throw Error(ErrorCode::ShapeMismatch, "image shape must be positive");
  Rng rng(seed);
  const int max_dy = height / 4;
  const int max_dx = width / 4;
  const double side_frac = std::sqrt(0.75);
  const int min_h = std::min(height, static_cast<int>(std::ceil(side_frac * height)));
  const int min_w = std::min(width, static_cast<int>(std::ceil(side_frac * width)));

  std::vector<Augmentation> members;
  members.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    Augmentation chain;
    AugmentationOp roll;
    roll.kind = AugmentationKind::roll;
    roll.dy = static_cast<int>(rng.uniform_int(-max_dy, max_dy));
    roll.dx = static_cast<int>(rng.uniform_int(-max_dx, max_dx));
    chain.push_back(roll);
    if (rng.bernoulli(0.5)) {
      AugmentationOp crop;
      crop.kind = AugmentationKind::crop_pad;
      crop.box_h = static_cast<int>(rng.uniform_int(min_h, height));
      crop.box_w = static_cast<int>(rng.uniform_int(min_w, width));
      crop.top = static_cast<int>(rng.uniform_int(0, height - crop.box_h));
      crop.left = static_cast<int>(rng.uniform_int(0, width - crop.box_w));
      chain.push_back(crop);
    }
    if (rng.bernoulli(0.5)) chain.push_back(AugmentationOp{AugmentationKind::horizontal_flip});
    bool identity = true;
    for (const AugmentationOp& op : chain) identity = identity && is_identity(op, height, width);
    if (identity) chain.push_back(AugmentationOp{AugmentationKind::horizontal_flip});
    members.push_back(std::move(chain));
  }
  return members;
}

}  // namespace geoguide
