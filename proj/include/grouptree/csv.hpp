#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace grouptree {

/// Shortest decimal form that round-trips the exact double value.
std::string format_double(double value);

/// Strict full-field double parse; throws ParseError on failure.
double parse_double(std::string_view field, std::size_t line);

/// Splits one CSV line on ','; no quoting (the formats here never need it).
/// A trailing '\r' on the line is dropped.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Streams a CSV file row by row. The first row is the header and is passed
/// with line number 1; blank lines are skipped. Throws DataError if the file
/// cannot be opened.
void for_each_csv_row(const std::string& path,
                      const std::function<void(std::size_t line,
                                               const std::vector<std::string_view>& fields)>& fn);

}  // namespace grouptree
