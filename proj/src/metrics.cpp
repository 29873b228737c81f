#include "geoguide/metrics.hpp"

#include "geoguide/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace geoguide {

namespace {

void require_same_shape(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, "images have different shapes");
}

void require_ssim_size(const ImageTensor& a) {
  if (a.height < kSsimWindow || a.width < kSsimWindow) {
    throw Error(ErrorCode::TooSmall, "SSIM needs both sides >= " + std::to_string(kSsimWindow));
  }
}

struct WindowStats {
  double mu_a, mu_b, var_a, var_b, cov;
};

WindowStats window_stats(const ImageTensor& a, const ImageTensor& b, int y0, int x0, int ch) {
  constexpr double n = kSsimWindow * kSsimWindow;
  double sa = 0.0, sb = 0.0;
  for (int y = y0; y < y0 + kSsimWindow; ++y) {
    for (int x = x0; x < x0 + kSsimWindow; ++x) {
      sa += a.at(y, x, ch);
      sb += b.at(y, x, ch);
    }
  }
  WindowStats s{sa / n, sb / n, 0.0, 0.0, 0.0};
  for (int y = y0; y < y0 + kSsimWindow; ++y) {
    for (int x = x0; x < x0 + kSsimWindow; ++x) {
      const double da = a.at(y, x, ch) - s.mu_a;
      const double db = b.at(y, x, ch) - s.mu_b;
      s.var_a += da * da;
      s.var_b += db * db;
      s.cov += da * db;
    }
  }
  s.var_a /= n - 1.0;
  s.var_b /= n - 1.0;
  s.cov /= n - 1.0;
  return s;
}

}  // namespace

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "cosine of vectors of different length");
  const double denom = std::sqrt(a.squaredNorm() * b.squaredNorm());
  if (!(denom > 0.0)) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return std::clamp(a.dot(b) / denom, -1.0, 1.0);
}

double morphing_score(const Vector& z_src, const Vector& z_trg) { return 100.0 * (1.0 - cosine(z_src, z_trg)); }

double psnr(const ImageTensor& a, const ImageTensor& b, double peak) {
  require_same_shape(a, b);
  const double mse = (a.pixels - b.pixels).squaredNorm() / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const ImageTensor& a, const ImageTensor& b, double peak) {
  require_same_shape(a, b);
  require_ssim_size(a);
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  double total = 0.0;
  std::size_t count = 0;
  for (int ch = 0; ch < a.channels; ++ch) {
    for (int y = 0; y + kSsimWindow <= a.height; ++y) {
      for (int x = 0; x + kSsimWindow <= a.width; ++x) {
        const WindowStats s = window_stats(a, b, y, x, ch);
        total += ((2.0 * s.mu_a * s.mu_b + c1) * (2.0 * s.cov + c2)) /
                 ((s.mu_a * s.mu_a + s.mu_b * s.mu_b + c1) * (s.var_a + s.var_b + c2));
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

Vector ssim_gradient(const ImageTensor& a, const ImageTensor& b, double peak) {
  require_same_shape(a, b);
  require_ssim_size(a);
  constexpr double n = kSsimWindow * kSsimWindow;
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  Vector grad = Vector::Zero(a.pixels.size());
  std::size_t count = 0;
  for (int ch = 0; ch < a.channels; ++ch) {
    for (int y0 = 0; y0 + kSsimWindow <= a.height; ++y0) {
      for (int x0 = 0; x0 + kSsimWindow <= a.width; ++x0) {
        const WindowStats s = window_stats(a, b, y0, x0, ch);
        const double l_num = 2.0 * s.mu_a * s.mu_b + c1;
        const double c_num = 2.0 * s.cov + c2;
        const double l_den = s.mu_a * s.mu_a + s.mu_b * s.mu_b + c1;
        const double c_den = s.var_a + s.var_b + c2;
        const double value = (l_num * c_num) / (l_den * c_den);
        for (int y = y0; y < y0 + kSsimWindow; ++y) {
          for (int x = x0; x < x0 + kSsimWindow; ++x) {
            const double da = a.at(y, x, ch) - s.mu_a;
            const double db = b.at(y, x, ch) - s.mu_b;
            const double d_num = (2.0 * s.mu_b / n) * c_num + l_num * (2.0 * db / (n - 1.0));
            const double d_den = (2.0 * s.mu_a / n) / l_den + (2.0 * da / (n - 1.0)) / c_den;
            grad(a.index(y, x, ch)) += d_num / (l_den * c_den) - value * d_den;
          }
        }
        ++count;
      }
    }
  }
  return grad / static_cast<double>(count);
}

double d_metric(const GuidanceMetric& q, const Vector& z_a, const Vector& z_b) {
  return std::clamp(0.5 * (1.0 + geodesic_cosine(q, z_a, z_b)), 0.0, 1.0);
}

GapReport modality_gap(const Matrix& image_feats, const Matrix& text_feats, double modulation_coeff) {
  if (image_feats.rows() == 0 || text_feats.rows() == 0) {
    throw Error(ErrorCode::EmptyBatch, "modality gap needs non-empty image and text batches");
  }
  if (image_feats.cols() != text_feats.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "image and text features differ in width");
  }
  GapReport r;
  r.gap_vector = image_feats.colwise().mean().transpose() - text_feats.colwise().mean().transpose();
  r.gap_norm = r.gap_vector.norm();
  r.modulation_coeff = modulation_coeff;
  return r;
}

double modulated_alignment(const GapReport& report, const Vector& z_img, const Vector& z_text) {
  return cosine(z_img - report.modulation_coeff * report.gap_vector, z_text);
}

void ScoreTable::add(const std::string& label, const std::vector<double>& samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyBatch, "no samples for " + label);
  ScoreRow row;
  row.label = label;
  row.n = samples.size();
  double sum = 0.0;
  for (double v : samples) sum += v;
  row.mean = sum / static_cast<double>(row.n);
  if (row.n > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - row.mean) * (v - row.mean);
    row.std = std::sqrt(ss / static_cast<double>(row.n - 1));
  }
  rows.push_back(std::move(row));
}

void write_score_table(const std::filesystem::path& path, const ScoreTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  if (!table.kind.empty()) out << "# kind=" << table.kind << '\n';
  out << "label,mean,std,n\n";
  char buf[64];
  auto num = [&](double v) {
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  for (const ScoreRow& r : table.rows) {
    out << r.label << ',' << num(r.mean) << ',' << num(r.std) << ',' << r.n << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

ScoreTable read_score_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  ScoreTable table;
  std::string line;
  bool header_seen = false;
  auto parse = [&](const std::string& s, double& v) {
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw Error(ErrorCode::ParseError, "bad number '" + s + "' in " + path.string());
    }
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# kind=", 0) == 0) table.kind = line.substr(7);
      continue;
    }
    if (!header_seen) {
      if (line != "label,mean,std,n") throw Error(ErrorCode::ParseError, "unexpected score table header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 4) throw Error(ErrorCode::RaggedRows, "score rows need 4 fields");
    ScoreRow row;
    row.label = fields[0];
    parse(fields[1], row.mean);
    parse(fields[2], row.std);
    double n = 0.0;
    parse(fields[3], n);
    row.n = static_cast<std::size_t>(n);
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "missing score table header");
  return table;
}

}  // namespace geoguide
