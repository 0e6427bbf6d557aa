#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dstsr::csv {

/// Splits one CSV line. Double-quoted fields may contain commas; "" is an
/// escaped quote. Throws std::invalid_argument on an unterminated quote.
std::vector<std::string> split_line(std::string_view line);

/// Quotes the field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest text that parses back to the same double; empty for NaN.
std::string format_number(double value);

/// Parses a number cell; empty (after trimming) yields NaN. Throws
/// std::invalid_argument on anything else that is not a number.
double parse_number(std::string_view cell);

std::string_view trim(std::string_view s);

} // namespace dstsr::csv
