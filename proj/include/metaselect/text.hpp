#pragma once

// Small string helpers shared by the file formats.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "metaselect/opb.hpp"

namespace metaselect {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split_whitespace(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

bool is_integer_token(std::string_view s);
BigInt parse_bigint(std::string_view s);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace metaselect
