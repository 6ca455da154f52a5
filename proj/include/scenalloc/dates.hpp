#pragma once

#include <compare>
#include <string>

namespace scenalloc {

// Calendar date. Trading-day arithmetic in this codebase works on row offsets,
// never on calendar offsets; Date is only ordered and formatted.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    // Days since 1970-01-01 (proleptic Gregorian).
    int serial() const;

    auto operator<=>(const Date&) const = default;
};

Date date_from_serial(int days);
bool is_valid_date(int y, int m, int d);

// Parses with a strptime-like format restricted to %Y, %m, %d plus literal
// separators. Default format is ISO-8601.
Date parse_date(const std::string& text, const std::string& format = "%Y-%m-%d");
std::string format_date(const Date& d);

// Shifts by whole years, clamping Feb 29 to Feb 28 when needed.
Date add_years(const Date& d, int years);

}  // namespace scenalloc
