#pragma once

// Minimal ISO-8601 calendar helpers: date <-> serial day and ACT/365
// year fractions. No timezone or calendar-holiday logic.

#include "series.hpp"

#include <cstdio>
#include <string>

namespace xdldi {

// Days since 1970-01-01 for a proleptic Gregorian date (civil-days algorithm).
inline long days_from_civil(long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

inline void civil_from_days(long z, long& y, unsigned& m, unsigned& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

inline long parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    char extra = '\0';
    if (std::sscanf(iso.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &extra) != 3 || iso.size() != 10 ||
        m < 1 || m > 12 || d < 1 || d > 31)
        throw InvalidInputError("bad ISO date '" + iso + "' (expected YYYY-MM-DD)");
    return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

inline std::string format_date(long serial) {
    long y;
    unsigned m, d;
    civil_from_days(serial, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04ld-%02u-%02u", y, m, d);
    return buf;
}

// ACT/365 year fraction between two ISO dates.
inline double year_fraction(const std::string& from, const std::string& to) {
    return static_cast<double>(parse_date(to) - parse_date(from)) / 365.0;
}

}  // namespace xdldi
