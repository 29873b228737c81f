#pragma once

#include "geoguide/linalg.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace geoguide {

// EMB1 layout (little-endian):
//   bytes 0..3   "EMB1"
//   bytes 4..7   rows, uint32
//   bytes 8..11  cols, uint32
//   then rows*cols IEEE-754 binary64 values, row-major.
inline constexpr char kEmb1Magic[4] = {'E', 'M', 'B', '1'};
inline constexpr std::size_t kEmb1HeaderBytes = 12;

void write_emb1(const std::filesystem::path& path, const Matrix& m);
/// Throws BadMagic, TruncatedPayload, ParseError (trailing bytes) or IoError.
Matrix read_emb1(const std::filesystem::path& path);

using CsvMeta = std::vector<std::pair<std::string, std::string>>;

struct CsvMatrix {
  Matrix values;
  CsvMeta meta;  // `# key=value` comment lines, in file order
};

/// One row per line, shortest round-trip decimals. Leading comment lines
/// carry `rows`, `cols` and any extra metadata so empty matrices keep
/// their width.
void write_csv(const std::filesystem::path& path, const Matrix& m, const CsvMeta& meta = {});

/// Throws RaggedRows, ParseError or IoError.
CsvMatrix read_csv_with_meta(const std::filesystem::path& path);
Matrix read_csv(const std::filesystem::path& path);

/// Parses CSV text directly (same rules as read_csv_with_meta).
CsvMatrix parse_csv(const std::string& text);

}  // namespace geoguide
