#include "grouptree/dates.hpp"

#include <array>

#include "grouptree/errors.hpp"

namespace grouptree {

namespace {

bool all_digits(std::string_view s) {
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return !s.empty();
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[static_cast<std::size_t>(m - 1)];
}

// Civil-calendar day counting relative to 1970-01-01 (Gregorian, proleptic).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

bool is_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    const auto ys = s.substr(0, 4), ms = s.substr(5, 2), ds = s.substr(8, 2);
    if (!all_digits(ys) || !all_digits(ms) || !all_digits(ds)) return false;
    const int y = to_int(ys), m = to_int(ms), d = to_int(ds);
    return m >= 1 && m <= 12 && d >= 1 && d <= days_in_month(y, m);
}

std::int64_t serial_from_iso(std::string_view s) {
    if (!is_iso_date(s)) throw ParseError("invalid date '" + std::string(s) + "', expected YYYY-MM-DD");
    return days_from_civil(to_int(s.substr(0, 4)), to_int(s.substr(5, 2)), to_int(s.substr(8, 2)));
}

std::string iso_from_serial(std::int64_t serial) {
    int y = 0, m = 0, d = 0;
    civil_from_days(serial, y, m, d);
    char buf[11];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return std::string(buf);
}

int weekday_from_serial(std::int64_t serial) {
    // 1970-01-01 was a Thursday (weekday 3).
    return static_cast<int>(((serial % 7) + 7 + 3) % 7);
}

std::vector<std::string> weekday_sequence(std::string_view start_iso, std::size_t count) {
    std::vector<std::string> out;
    out.reserve(count);
    std::int64_t s = serial_from_iso(start_iso);
    while (out.size() < count) {
        if (weekday_from_serial(s) < 5) out.push_back(iso_from_serial(s));
        ++s;
    }
    return out;
}

}  // namespace grouptree
