#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace grouptree {

// Calendar dates are carried as ISO-8601 strings (YYYY-MM-DD) so that
// lexicographic order equals chronological order and files round-trip
// byte-exactly. The helpers below exist for validation and for generating
// synthetic weekday calendars.

/// Strict YYYY-MM-DD check, including month lengths and leap years.
bool is_iso_date(std::string_view s);

/// Days since 1970-01-01 for a civil date. Throws ParseError on bad input.
std::int64_t serial_from_iso(std::string_view s);

/// Inverse of serial_from_iso.
std::string iso_from_serial(std::int64_t serial);

/// 0 = Monday ... 6 = Sunday.
int weekday_from_serial(std::int64_t serial);

/// `count` consecutive weekdays (Mon-Fri) starting at the first weekday
/// on or after `start_iso`.
std::vector<std::string> weekday_sequence(std::string_view start_iso, std::size_t count);

}  // namespace grouptree
