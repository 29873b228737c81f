#include "geoguide/config_kv.hpp"
#include "geoguide/error.hpp"
#include "geoguide/feature_io.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <limits>

using namespace geoguide;

namespace {

std::filesystem::path tmp(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "geoguide_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::NonFinite;
}

}  // namespace

TEST(Emb1, OneByOneLayout) {
  Matrix m(1, 1);
  m(0, 0) = 2.5;
  write_emb1(tmp("one.emb1"), m);
  const std::string bytes = slurp(tmp("one.emb1"));
  ASSERT_EQ(bytes.size(), 20u);
  EXPECT_EQ(bytes.substr(0, 4), "EMB1");
  const unsigned char dims[8] = {1, 0, 0, 0, 1, 0, 0, 0};
  EXPECT_EQ(std::memcmp(bytes.data() + 4, dims, 8), 0);
  // 2.5 = 0x4004000000000000, little-endian.
  const unsigned char payload[8] = {0, 0, 0, 0, 0, 0, 0x04, 0x40};
  EXPECT_EQ(std::memcmp(bytes.data() + 12, payload, 8), 0);
}

TEST(Emb1, BitExactRoundTrip) {
  Rng rng(1);
  Matrix m = oracle::random_matrix(rng, 7, 3);
  m(0, 0) = -0.0;
  m(1, 1) = std::numeric_limits<double>::denorm_min();
  write_emb1(tmp("r.emb1"), m);
  const Matrix back = read_emb1(tmp("r.emb1"));
  ASSERT_EQ(back.rows(), 7);
  ASSERT_EQ(back.cols(), 3);
  EXPECT_EQ(std::memcmp(back.data(), m.data(), sizeof(double) * 21), 0);
}

TEST(Emb1, ZeroRows) {
  write_emb1(tmp("z.emb1"), Matrix(0, 4));
  EXPECT_EQ(slurp(tmp("z.emb1")).size(), 12u);
  const Matrix back = read_emb1(tmp("z.emb1"));
  EXPECT_EQ(back.rows(), 0);
  EXPECT_EQ(back.cols(), 4);
}

TEST(Emb1, ReaderErrors) {
  Rng rng(2);
  write_emb1(tmp("ok.emb1"), oracle::random_matrix(rng, 2, 2));
  std::string bytes = slurp(tmp("ok.emb1"));
  std::string bad = bytes;
  bad[0] = 'X';
  std::ofstream(tmp("magic.emb1"), std::ios::binary) << bad;
  std::ofstream(tmp("trunc.emb1"), std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  std::ofstream(tmp("extra.emb1"), std::ios::binary) << bytes << "x";
  EXPECT_EQ(code_of([] { read_emb1(tmp("magic.emb1")); }), ErrorCode::BadMagic);
  EXPECT_EQ(code_of([] { read_emb1(tmp("trunc.emb1")); }), ErrorCode::TruncatedPayload);
  EXPECT_EQ(code_of([] { read_emb1(tmp("extra.emb1")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { read_emb1(tmp("nope.emb1")); }), ErrorCode::IoError);
}

TEST(Csv, ParsesPlainText) {
  const CsvMatrix m = parse_csv("1,2\n3,4");
  ASSERT_EQ(m.values.rows(), 2);
  EXPECT_EQ(m.values(1, 0), 3.0);
  EXPECT_EQ(m.values(0, 1), 2.0);
  EXPECT_EQ(code_of([] { parse_csv("1,2\n3"); }), ErrorCode::RaggedRows);
  EXPECT_EQ(code_of([] { parse_csv("1,zz\n"); }), ErrorCode::ParseError);
}

TEST(Csv, RoundTripWithMeta) {
  Rng rng(3);
  const Matrix m = oracle::random_matrix(rng, 5, 4) * 1e-7;
  write_csv(tmp("m.csv"), m, {{"note", "hello"}});
  const CsvMatrix back = read_csv_with_meta(tmp("m.csv"));
  EXPECT_LE((back.values - m).cwiseAbs().maxCoeff(), 1e-15 * m.cwiseAbs().maxCoeff());
  EXPECT_EQ(kv_lookup(back.meta, "note").value_or(""), "hello");
}

TEST(Csv, EmptyMatrixKeepsWidth) {
  write_csv(tmp("e.csv"), Matrix(0, 3));
  const Matrix back = read_csv(tmp("e.csv"));
  EXPECT_EQ(back.rows(), 0);
  EXPECT_EQ(back.cols(), 3);
}

TEST(ConfigKv, ParseFormatLookup) {
  const KeyValues kv = parse_kv("# comment\na = 1\n\nb=x y\na=2\n");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv_lookup(kv, "a").value(), "2");
  EXPECT_EQ(kv_lookup(kv, "b").value(), "x y");
  EXPECT_FALSE(kv_lookup(kv, "c").has_value());
  EXPECT_EQ(parse_kv(format_kv(kv)), kv);
  EXPECT_EQ(code_of([] { parse_kv("novalue\n"); }), ErrorCode::ParseError);
}
