#include "geoguide/feature_io.hpp"

#include "geoguide/error.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace geoguide {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

double parse_real(const std::string& field, std::size_t line_no) {
  double v = 0.0;
  const char* first = field.data();
  if (!field.empty() && field[0] == '+') ++first;
  auto res = std::from_chars(first, field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

void write_emb1(const std::filesystem::path& path, const Matrix& m) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (static_cast<std::uint64_t>(m.rows()) > kMax || static_cast<std::uint64_t>(m.cols()) > kMax) {
    throw Error(ErrorCode::IoError, "matrix too large for EMB1");
  }
  std::vector<unsigned char> bytes(kEmb1Magic, kEmb1Magic + 4);
  bytes.reserve(kEmb1HeaderBytes + static_cast<std::size_t>(m.size()) * 8);
  put_u32(bytes, static_cast<std::uint32_t>(m.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_u64(bytes, std::bit_cast<std::uint64_t>(m(i, j)));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Matrix read_emb1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 || std::memcmp(buf.data(), kEmb1Magic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, path.string() + " does not start with EMB1");
  }
  if (buf.size() < kEmb1HeaderBytes) throw Error(ErrorCode::TruncatedPayload, path.string() + ": header truncated");
  const std::uint64_t rows = get_le(buf.data() + 4, 4);
  const std::uint64_t cols = get_le(buf.data() + 8, 4);
  const std::uint64_t payload = rows * cols * 8;
  const std::uint64_t have = buf.size() - kEmb1HeaderBytes;
  if (have < payload) {
    throw Error(ErrorCode::TruncatedPayload, path.string() + ": expected " + std::to_string(payload) +
                                                 " payload bytes, found " + std::to_string(have));
  }
  if (have > payload) throw Error(ErrorCode::ParseError, path.string() + ": trailing bytes after payload");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const unsigned char* p = buf.data() + kEmb1HeaderBytes;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j, p += 8) m(i, j) = std::bit_cast<double>(get_le(p, 8));
  }
  return m;
}

void write_csv(const std::filesystem::path& path, const Matrix& m, const CsvMeta& meta) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "# rows=" << m.rows() << "\n# cols=" << m.cols() << '\n';
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      auto res = std::to_chars(buf, buf + sizeof buf, m(i, j));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

CsvMatrix parse_csv(const std::string& text) {
  CsvMatrix out;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  long declared_cols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = trim(std::string_view(t).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      std::string key = trim(std::string_view(body).substr(0, eq));
      std::string value = trim(std::string_view(body).substr(eq + 1));
      if (key == "cols") declared_cols = static_cast<long>(parse_real(value, line_no));
      if (key != "rows" && key != "cols") out.meta.emplace_back(std::move(key), std::move(value));
      continue;
    }
    std::vector<double> row;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = t.find(',', start);
      row.push_back(parse_real(trim(std::string_view(t).substr(start, comma - start)), line_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::RaggedRows, "line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                                             " fields, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = rows.empty() ? std::max<long>(declared_cols, 0) : static_cast<Eigen::Index>(rows.front().size());
  out.values.resize(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) out.values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return out;
}

CsvMatrix read_csv_with_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

Matrix read_csv(const std::filesystem::path& path) { return read_csv_with_meta(path).values; }

}  // namespace geoguide
