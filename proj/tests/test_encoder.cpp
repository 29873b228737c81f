#include "geoguide/encoder.hpp"
#include "geoguide/error.hpp"
#include "geoguide/random.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace geoguide;

TEST(Rng, ReproducibleAndSeedSensitive) {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 10; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    EXPECT_NE(x, c.normal());
  }
  Rng u(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  Rng r(9);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Encoder, DeterministicWeights) {
  const ToyEncoder a = make_encoder(EncoderKind::image, 12, 4, 3);
  const ToyEncoder b = make_encoder(EncoderKind::image, 12, 4, 3);
  const ToyEncoder c = make_encoder(EncoderKind::image, 12, 4, 4);
  EXPECT_EQ((a.weight - b.weight).norm(), 0.0);
  EXPECT_GT((a.weight - c.weight).norm(), 0.0);
  EXPECT_EQ(a.output_dim(), 4u);
  EXPECT_EQ(a.input_dim(), 12u);
}

TEST(Encoder, IdentityAndScaleInvariance) {
  const ToyEncoder id = make_linear_encoder(EncoderKind::image, Matrix::Identity(3, 3));
  const Vector e1 = Vector::Unit(3, 0);
  EXPECT_LE((encode(id, e1) - e1).norm(), 1e-15);
  EXPECT_LE((encode(id, 3.0 * e1) - e1).norm(), 1e-15);
  Rng rng(2);
  const ToyEncoder e = make_encoder(EncoderKind::image, 10, 5, 1);
  const Vector x = oracle::random_vector(rng, 10);
  EXPECT_NEAR(encode(e, x).norm(), 1.0, 1e-10);
  EXPECT_LE((encode(e, 4.5 * x) - encode(e, x)).norm(), 1e-10);
}

TEST(Encoder, ZeroActivation) {
  const ToyEncoder e = make_encoder(EncoderKind::image, 4, 2, 1);
  try {
    encode(e, Vector::Zero(4));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::ZeroActivation);
  }
}

TEST(Encoder, BackwardMatchesFiniteDifferences) {
  Rng rng(3);
  for (std::size_t hidden : {std::size_t{0}, std::size_t{7}}) {
    const ToyEncoder e = make_encoder(EncoderKind::image, 6, 4, 11, hidden);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector x = oracle::random_vector(rng, 6), w = oracle::random_vector(rng, 4);
      const Vector num = oracle::numeric_gradient([&](const Vector& v) { return w.dot(encode(e, v)); }, x, 1e-6);
      EXPECT_LE(oracle::relative_error(encode_backward(e, x, w), num), 1e-5);
    }
  }
}

TEST(Prompt, ReproducibleAndDistinct) {
  const ToyEncoder t = make_encoder(EncoderKind::text, 64, 32, 8);
  EXPECT_EQ((encode_prompt(t, "a cat") - encode_prompt(t, "a cat")).norm(), 0.0);
  EXPECT_GT((encode_prompt(t, "a cat") - encode_prompt(t, "a dog")).norm(), 1e-3);
  EXPECT_EQ(prompt_vector("x", 16).size(), 16);
}

namespace {

ImageTensor ramp(int h, int w, int c) {
  ImageTensor img(h, w, c);
  for (Eigen::Index i = 0; i < img.pixels.size(); ++i) img.pixels(i) = static_cast<double>(i + 1);
  return img;
}

double inner(const ImageTensor& a, const ImageTensor& b) { return a.pixels.dot(b.pixels); }

}  // namespace

TEST(Augmentation, FlipIsInvolution) {
  const ImageTensor x = ramp(4, 5, 3);
  const AugmentationOp flip{AugmentationKind::horizontal_flip};
  EXPECT_EQ((apply_augmentation(flip, apply_augmentation(flip, x)).pixels - x.pixels).norm(), 0.0);
  EXPECT_EQ(apply_augmentation(flip, x).at(0, 0, 1), x.at(0, 4, 1));
}

TEST(Augmentation, RollAdjointIsInverseRoll) {
  const ImageTensor x = ramp(5, 6, 2);
  const AugmentationOp roll{AugmentationKind::roll, 2, -1};
  const AugmentationOp back{AugmentationKind::roll, -2, 1};
  EXPECT_EQ((apply_adjoint(roll, x).pixels - apply_augmentation(back, x).pixels).norm(), 0.0);
  EXPECT_EQ(apply_augmentation(roll, x).at(2, 0, 0), x.at(0, 1, 0));
  const AugmentationOp zero{AugmentationKind::roll, 0, 0};
  EXPECT_EQ((apply_augmentation(zero, x).pixels - x.pixels).norm(), 0.0);
}

TEST(Augmentation, AdjointInnerProductIdentity) {
  Rng rng(4);
  const auto members = sample_augmentations(17, 40, 9, 7);
  for (const auto& m : members) {
    const ImageTensor x = oracle::random_image(rng, 9, 7, 3);
    const ImageTensor y = oracle::random_image(rng, 9, 7, 3);
    EXPECT_NEAR(inner(apply_augmentation(m, x), y), inner(x, apply_adjoint(m, y)), 1e-10);
  }
}

TEST(Augmentation, Linearity) {
  Rng rng(5);
  const auto members = sample_augmentations(3, 10, 8, 8);
  const ImageTensor x = oracle::random_image(rng, 8, 8, 1), y = oracle::random_image(rng, 8, 8, 1);
  ImageTensor combo(8, 8, 1, 2.0 * x.pixels - 0.5 * y.pixels);
  for (const auto& m : members) {
    const Vector lhs = apply_augmentation(m, combo).pixels;
    const Vector rhs = 2.0 * apply_augmentation(m, x).pixels - 0.5 * apply_augmentation(m, y).pixels;
    EXPECT_LE((lhs - rhs).norm(), 1e-10);
  }
}

TEST(Augmentation, CropPadMovesBoxToCenter) {
  const ImageTensor x = ramp(6, 6, 1);
  const AugmentationOp crop{AugmentationKind::crop_pad, 0, 0, 0, 0, 4, 4};
  const ImageTensor y = apply_augmentation(crop, x);
  EXPECT_EQ(y.at(1, 1, 0), x.at(0, 0, 0));
  EXPECT_EQ(y.at(4, 4, 0), x.at(3, 3, 0));
  EXPECT_EQ(y.at(0, 0, 0), 0.0);
  EXPECT_EQ(y.at(5, 5, 0), 0.0);
}

TEST(Augmentation, BoxOutOfBounds) {
  const ImageTensor x = ramp(4, 4, 1);
  const AugmentationOp bad{AugmentationKind::crop_pad, 0, 0, 2, 0, 3, 2};
  try {
    apply_augmentation(bad, x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BoxOutOfBounds);
  }
}

TEST(Augmentation, SamplingIsDeterministicAndWithinBounds) {
  const auto a = sample_augmentations(42, kDefaultEnsembles, 16, 16);
  const auto b = sample_augmentations(42, kDefaultEnsembles, 16, 16);
  ASSERT_EQ(a.size(), 16u);
  const ImageTensor x = ramp(16, 16, 1);
  for (std::size_t j = 0; j < a.size(); ++j) {
    ASSERT_EQ(a[j].size(), b[j].size());
    EXPECT_EQ((apply_augmentation(a[j], x).pixels - apply_augmentation(b[j], x).pixels).norm(), 0.0);
    EXPECT_GT((apply_augmentation(a[j], x).pixels - x.pixels).norm(), 0.0);
    for (const auto& op : a[j]) {
      if (op.kind == AugmentationKind::roll) {
        EXPECT_LE(std::abs(op.dy), 4);
        EXPECT_LE(std::abs(op.dx), 4);
      }
      if (op.kind == AugmentationKind::crop_pad) EXPECT_GE(op.box_h * op.box_w, 0.75 * 256);
    }
  }
  const auto c = sample_augmentations(43, kDefaultEnsembles, 16, 16);
  bool differs = false;
  for (std::size_t j = 0; j < c.size(); ++j)
    differs |= (apply_augmentation(a[j], x).pixels - apply_augmentation(c[j], x).pixels).norm() > 0;
  EXPECT_TRUE(differs);
}

TEST(Image, PpmAndPgmRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "geoguide_image_test";
  std::filesystem::create_directories(dir);
  Rng rng(6);
  for (int c : {1, 3}) {
    ImageTensor img = oracle::random_image(rng, 5, 7, c);
    for (Eigen::Index i = 0; i < img.pixels.size(); ++i) img.pixels(i) = std::round(img.pixels(i) * 255) / 255;
    const auto path = dir / (c == 1 ? "a.pgm" : "a.ppm");
    write_image(path, img);
    const ImageTensor back = read_image(path);
    ASSERT_TRUE(back.same_shape(img));
    EXPECT_LE((back.pixels - img.pixels).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Image, ReaderErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "geoguide_image_test";
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& bytes) {
    std::ofstream(dir / name, std::ios::binary) << bytes;
    return dir / name;
  };
  auto code_of = [](const std::filesystem::path& p) {
    try {
      read_image(p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::NonFinite;
  };
  EXPECT_EQ(code_of(write("bad.ppm", "P3\n1 1\n255\n000")), ErrorCode::BadMagic);
  EXPECT_EQ(code_of(write("short.ppm", "P6\n2 2\n255\nabc")), ErrorCode::TruncatedPayload);
  EXPECT_EQ(code_of(write("hdr.ppm", "P6\nx 2\n255\n")), ErrorCode::ParseError);
  EXPECT_EQ(code_of(dir / "missing.ppm"), ErrorCode::IoError);
}

TEST(Image, CommentsInHeaderAreSkipped) {
  const auto dir = std::filesystem::temp_directory_path() / "geoguide_image_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "c.pgm", std::ios::binary) << "P5\n# made by hand\n2 1\n255\n" << char(0) << char(255);
  const ImageTensor img = read_image(dir / "c.pgm");
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.pixels(1), 1.0);
}
