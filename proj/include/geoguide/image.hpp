#pragma once

#include "geoguide/linalg.hpp"

#include <cstddef>
#include <filesystem>

namespace geoguide {

/// Pixels in [0, 1], row-major with interleaved channels:
/// index = (y * width + x) * channels + c.
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  Vector pixels;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c);  // zero-filled
  ImageTensor(int h, int w, int c, Vector px);

  std::size_t size() const noexcept { return static_cast<std::size_t>(pixels.size()); }
  Eigen::Index index(int y, int x, int c) const noexcept {
    return (static_cast<Eigen::Index>(y) * width + x) * channels + c;
  }
  double& at(int y, int x, int c) { return pixels(index(y, x, c)); }
  double at(int y, int x, int c) const { return pixels(index(y, x, c)); }

  bool same_shape(const ImageTensor& o) const noexcept {
    return height == o.height && width == o.width && channels == o.channels;
  }
  void clamp();
};

/// Reads binary PGM (P5) or PPM (P6) with maxval <= 255.
ImageTensor read_image(const std::filesystem::path& path);

/// Writes P5 for one channel and P6 for three; values are rounded to 8 bits.
void write_image(const std::filesystem::path& path, const ImageTensor& img);

}  // namespace geoguide
