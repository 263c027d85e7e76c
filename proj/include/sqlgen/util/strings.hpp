#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sqlgen::util {

std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Splits on whitespace; empty tokens are dropped.
std::vector<std::string> split_whitespace(std::string_view s);

/// Collapses runs of whitespace into single spaces and trims both ends.
std::string collapse_whitespace(std::string_view s);

/// 64-bit FNV-1a. Stable across platforms; used for ids and mock keys.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

/// Truncates at the last byte that does not split a UTF-8 sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t max_bytes);

}  // namespace sqlgen::util
