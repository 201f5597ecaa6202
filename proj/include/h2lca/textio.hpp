#pragma once

#include <string>
#include <vector>

namespace h2lca {

std::string trim(const std::string& s);

/// Splits on a single-character delimiter; fields are trimmed.
/// No quoting: none of the supported formats use quoted fields.
std::vector<std::string> split(const std::string& line, char delim);

/// Strict double parser; the whole token must be consumed.
double parse_number(const std::string& token, std::size_t line_no);

/// Canonical number formatting for exports: %.10g, locale-free.
/// Ten significant digits keep dispatch quantities exact while
/// suppressing binary round-off noise.
std::string fmt_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Splits text into lines; accepts \n and \r\n.
std::vector<std::string> split_lines(const std::string& text);

} // namespace h2lca
