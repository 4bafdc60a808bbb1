#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fails {

std::string ascii_lower(std::string_view text);
std::string_view trim(std::string_view text);
/// Lowercase with everything except ASCII letters and digits removed.
std::string impact_key(std::string_view label);
std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
/// Runs of whitespace become one space; leading/trailing whitespace removed.
std::string collapse_whitespace(std::string_view text);
/// Case-sensitive search for `needle` in `haystack` where the characters on
/// either side of the hit are not ASCII letters or digits.
bool contains_on_word_boundary(std::string_view haystack, std::string_view needle);
bool starts_with_ci(std::string_view text, std::string_view prefix);

std::uint64_t fnv1a64(std::string_view text);
std::string sha256_hex(std::string_view bytes);
std::string base64_encode(std::string_view bytes);

}  // namespace fails
