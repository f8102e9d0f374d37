#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dmimo::csv {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Writes one comma-separated row and a trailing newline.
void write_row(std::ostream& os, const std::vector<std::string>& cells);

/// Splits a line on commas; no quoting support (none of our fields need it).
std::vector<std::string> split(std::string_view line);

}  // namespace dmimo::csv
