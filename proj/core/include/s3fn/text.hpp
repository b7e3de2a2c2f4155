#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the line-oriented file formats.
namespace s3fn::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Shortest decimal that parses back to exactly the same double.
std::string format_double(double v);
std::string join(std::span<const double> values, char sep = ',');

/// Strict parse: the whole (trimmed) token must be consumed.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);
std::vector<double> parse_doubles(std::string_view line, char sep = ',');

/// Reads a file as LF-separated lines (a trailing CR is stripped).
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace s3fn::text
