#include "geoguide/image.hpp"

#include "geoguide/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace geoguide {

ImageTensor::ImageTensor(int h, int w, int c)
    : ImageTensor(h, w, c, Vector::Zero(static_cast<Eigen::Index>(h) * w * c)) {}

ImageTensor::ImageTensor(int h, int w, int c, Vector px)
    : height(h), width(w), channels(c), pixels(std::move(px)) {
  if (h < 1 || w < 1 || c < 1) throw Error(ErrorCode::ShapeMismatch, "image dimensions must be positive");
  if (pixels.size() != static_cast<Eigen::Index>(h) * w * c) {
    throw Error(ErrorCode::ShapeMismatch, "pixel count does not match the image shape");
  }
}

void ImageTensor::clamp() { pixels = pixels.cwiseMax(0.0).cwiseMin(1.0); }

namespace {

// Reads the next header integer, skipping whitespace and '#' comments.
int read_header_int(const std::vector<unsigned char>& buf, std::size_t& pos, const std::string& path) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= buf.size() || !std::isdigit(buf[pos])) {
    throw Error(ErrorCode::ParseError, "malformed image header in " + path);
  }
  long v = 0;
  while (pos < buf.size() && std::isdigit(buf[pos])) {
    v = v * 10 + (buf[pos] - '0');
    if (v > 1'000'000) throw Error(ErrorCode::ParseError, "image dimension too large in " + path);
    ++pos;
  }
  return static_cast<int>(v);
}

}  // namespace

ImageTensor read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6')) {
    throw Error(ErrorCode::BadMagic, path.string() + " is not a binary PGM/PPM file");
  }
  const int channels = buf[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  const int w = read_header_int(buf, pos, path.string());
  const int h = read_header_int(buf, pos, path.string());
  const int maxval = read_header_int(buf, pos, path.string());
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255) {
    throw Error(ErrorCode::ParseError, "unsupported image header in " + path.string());
  }
  ++pos;  // single whitespace byte before the raster
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;
  if (pos > buf.size() || buf.size() - pos < count) {
    throw Error(ErrorCode::TruncatedPayload, "image raster truncated in " + path.string());
  }
  ImageTensor img(h, w, channels);
  for (std::size_t i = 0; i < count; ++i) {
    img.pixels(static_cast<Eigen::Index>(i)) = static_cast<double>(buf[pos + i]) / maxval;
  }
  return img;
}

void write_image(const std::filesystem::path& path, const ImageTensor& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error(ErrorCode::ShapeMismatch, "only 1- or 3-channel images can be written");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  std::vector<char> raster(img.size());
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double v = std::clamp(img.pixels(static_cast<Eigen::Index>(i)), 0.0, 1.0);
    raster[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace geoguide
