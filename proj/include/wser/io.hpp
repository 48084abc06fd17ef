#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wser {

/// 17 significant digits; strtod of the result gives back the same double.
std::string format_double(double v);

/// Parses a whole field as a double; `where` prefixes the error message.
double parse_double(const std::string& field, const std::string& where);

std::vector<std::string> split_fields(std::string_view line, char sep);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace wser
