#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geoguide {

/// Flat `key=value` lines; `#` starts a comment line. Order is preserved and
/// later duplicates win on lookup.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_kv(std::string_view text);
std::string format_kv(const KeyValues& kv);

KeyValues read_kv_file(const std::filesystem::path& path);
void write_kv_file(const std::filesystem::path& path, const KeyValues& kv);

std::optional<std::string> kv_lookup(const KeyValues& kv, std::string_view key);

}  // namespace geoguide
