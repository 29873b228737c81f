#pragma once

#include "geoguide/image.hpp"
#include "geoguide/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace geoguide {

enum class EncoderKind { image, text };

/// Frozen stand-in for a contrastive encoder: z = W x / |W x|, or with a
/// hidden layer z = W tanh(H x) / |W tanh(H x)|.
struct ToyEncoder {
  EncoderKind kind = EncoderKind::image;
  Matrix weight;         // output_dim x (hidden_dim or input_dim)
  Matrix hidden_weight;  // hidden_dim x input_dim; empty for the linear encoder
  std::uint64_t seed = 0;

  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(weight.rows()); }
  std::size_t input_dim() const noexcept {
    return static_cast<std::size_t>(hidden_weight.size() > 0 ? hidden_weight.cols() : weight.cols());
  }
  bool has_hidden_layer() const noexcept { return hidden_weight.size() > 0; }
};

/// Weights are standard normals from Rng(seed) (row-major fill order), each
/// layer scaled by 1/sqrt(fan_in). hidden_dim = 0 selects the linear encoder.
ToyEncoder make_encoder(EncoderKind kind, std::size_t input_dim, std::size_t output_dim,
                        std::uint64_t seed, std::size_t hidden_dim = 0);

/// Encoder with a caller-provided weight (for example the identity).
ToyEncoder make_linear_encoder(EncoderKind kind, Matrix weight);

/// Unit-norm feature; throws ZeroActivation when the pre-normalization
/// activation has norm below 1e-12.
Vector encode(const ToyEncoder& e, const Vector& x);

/// Pulls a cotangent on the unit output back to the input.
Vector encode_backward(const ToyEncoder& e, const Vector& x, const Vector& grad_z);

/// Deterministic "prompt" input: one-hot at hash(prompt) mod dim plus 0.1
/// scaled Gaussian noise seeded by the same hash.
Vector prompt_vector(std::string_view prompt, std::size_t dim);

/// encode(e, prompt_vector(prompt, e.input_dim())).
Vector encode_prompt(const ToyEncoder& e, std::string_view prompt);

enum class AugmentationKind { roll, crop_pad, horizontal_flip };

/// One exactly-linear pixel map (a permutation with zero fill).
///
/// roll:      out(y, x) = in((y - dy) mod H, (x - dx) mod W)
/// crop_pad:  the box [top, top+box_h) x [left, left+box_w) is moved to the
///            centered offset ((H-box_h)/2, (W-box_w)/2); the rest is zero
/// horizontal_flip: out(y, x) = in(y, W-1-x)
struct AugmentationOp {
  AugmentationKind kind = AugmentationKind::roll;
  int dy = 0;
  int dx = 0;
  int top = 0;
  int left = 0;
  int box_h = 0;
  int box_w = 0;
};

/// Ensemble member: ops applied in order.
using Augmentation = std::vector<AugmentationOp>;

ImageTensor apply_augmentation(const AugmentationOp& op, const ImageTensor& x);
/// Transpose of apply_augmentation.
ImageTensor apply_adjoint(const AugmentationOp& op, const ImageTensor& y);

ImageTensor apply_augmentation(const Augmentation& chain, const ImageTensor& x);
ImageTensor apply_adjoint(const Augmentation& chain, const ImageTensor& y);

/// Default ensemble size.
inline constexpr std::size_t kDefaultEnsembles = 16;

/// `count` members drawn from Rng(seed). Each member is a roll with offsets
/// within a quarter of each side, then a crop_pad keeping at least 75% of the
/// area with probability 1/2, then a flip with probability 1/2. A member that
/// would be the identity gets a flip appended.
std::vector<Augmentation> sample_augmentations(std::uint64_t seed, std::size_t count, int height,
                                               int width);

}  // namespace geoguide
