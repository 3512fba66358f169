#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace calib::text {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Splits one CSV line on commas. Quoting is not supported; ids must not contain commas.
// Surrounding whitespace and a trailing '\r' are stripped from each field.
std::vector<std::string> split_csv_line(std::string_view line);

std::string_view trim(std::string_view s);

// Strict numeric parsing: the whole field must be consumed.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

std::vector<double> parse_double_list(std::string_view s, std::string_view what);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace calib::text
