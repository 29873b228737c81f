#pragma once

#include "geoguide/geodesic.hpp"
#include "geoguide/image.hpp"
#include "geoguide/linalg.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace geoguide {

/// Plain cosine a.b / sqrt(|a|^2 |b|^2), clamped to [-1, 1].
double cosine(const Vector& a, const Vector& b);

/// 100 * (1 - cos(z_src, z_trg)), in [0, 200].
double morphing_score(const Vector& z_src, const Vector& z_trg);

/// Value reported for identical images, and upper clamp for all others.
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(peak^2 / MSE), capped at kPsnrCap. Throws ShapeMismatch.
double psnr(const ImageTensor& a, const ImageTensor& b, double peak = 1.0);

/// Side of the square uniform SSIM window.
inline constexpr int kSsimWindow = 8;

/// Mean SSIM over every 8x8 window position (stride 1) and channel, with
/// sample (n-1) statistics and C1 = (0.01 peak)^2, C2 = (0.03 peak)^2.
/// Throws ShapeMismatch, or TooSmall when a side is shorter than 8.
double ssim(const ImageTensor& a, const ImageTensor& b, double peak = 1.0);

/// Gradient of ssim(a, b) with respect to the pixels of a.
Vector ssim_gradient(const ImageTensor& a, const ImageTensor& b, double peak = 1.0);

/// (1 + geodesic_cosine(q, z_a, z_b)) / 2, clamped to [0, 1].
double d_metric(const GuidanceMetric& q, const Vector& z_a, const Vector& z_b);

struct GapReport {
  Vector gap_vector;  // mean image feature - mean text feature
  double gap_norm = 0.0;
  double modulation_coeff = 0.0;
};

/// Throws EmptyBatch for an empty batch and DimensionMismatch for unequal widths.
GapReport modality_gap(const Matrix& image_feats, const Matrix& text_feats, double modulation_coeff = 0.0);

/// cos(z_img - c * gap, z_text) with c = report.modulation_coeff.
double modulated_alignment(const GapReport& report, const Vector& z_img, const Vector& z_text);

struct ScoreRow {
  std::string label;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 when n == 1
  std::size_t n = 0;
};

struct ScoreTable {
  std::string kind;
  std::vector<ScoreRow> rows;

  /// Appends a row summarizing `samples`; throws EmptyBatch when empty.
  void add(const std::string& label, const std::vector<double>& samples);
};

/// CSV with header `label,mean,std,n`.
void write_score_table(const std::filesystem::path& path, const ScoreTable& table);
ScoreTable read_score_table(const std::filesystem::path& path);

}  // namespace geoguide
