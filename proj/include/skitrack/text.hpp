#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skitrack {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Strict full-string parse; nullopt on any trailing garbage.
std::optional<double> parse_number(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary and renames, so readers never see a partial file.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace skitrack
