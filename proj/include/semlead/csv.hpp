#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace semlead::csv {

/// Quotes a field when it contains a comma, quote or newline.
std::string field(std::string_view text);
/// Shortest text that round-trips the double exactly.
std::string number(double x);

/// Splits one line, honoring double-quoted fields.
std::vector<std::string> split(std::string_view line);

/// Reads a table whose header must equal `header`; returns data rows.
std::vector<std::vector<std::string>> read(std::istream& in, const std::vector<std::string>& header,
                                           std::string_view what);

double to_double(const std::string& text, std::string_view what);
int to_int(const std::string& text, std::string_view what);

}  // namespace semlead::csv
