#pragma once

// Small parsing helpers shared by the text formats. Internal to the library.

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "benthos/error.hpp"

namespace benthos::detail {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);

/// Whole-string double parse; throws Error(format) naming `what`.
double parse_double(std::string_view text, std::string_view what);
std::size_t parse_size(std::string_view text, std::string_view what);
bool try_parse_double(std::string_view text, double& out) noexcept;

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path,
                     std::string_view contents);

/// Numeric CSV rows; skips blank lines, `#` comments and a leading
/// non-numeric header row. Every row must have `columns` fields.
std::vector<std::vector<double>> read_numeric_csv(
    const std::filesystem::path& path, std::size_t columns);
std::vector<std::vector<double>> parse_numeric_csv(std::string_view text,
                                                   std::size_t columns,
                                                   const std::string& source);

}  // namespace benthos::detail
