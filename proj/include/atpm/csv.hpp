#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace atpm::csv {

/// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

/// Splits text into lines, accepting \n and \r\n; a trailing newline does not
/// produce an empty final line.
std::vector<std::string_view> lines(std::string_view text);

/// Quotes a field only when it needs quoting.
std::string escape(std::string_view field);

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

/// Fixed-point form with `digits` decimals; used where byte-stable output
/// across runs matters more than exactness.
std::string format_fixed(double value, int digits);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace atpm::csv
