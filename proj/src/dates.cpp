#include "scenalloc/dates.hpp"

#include "scenalloc/errors.hpp"

namespace scenalloc {

namespace {

// Howard Hinnant's civil-date algorithms.
int days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(int z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

int days_in_month(int y, int m) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[m - 1];
}

}  // namespace

int Date::serial() const { return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)); }

Date date_from_serial(int days) {
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    return Date{y, static_cast<int>(m), static_cast<int>(d)};
}

bool is_valid_date(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1) return false;
    return d <= days_in_month(y, m);
}

Date parse_date(const std::string& text, const std::string& format) {
    int y = -1, mo = -1, da = -1;
    size_t ti = 0;
    for (size_t fi = 0; fi < format.size(); ++fi) {
        if (format[fi] == '%' && fi + 1 < format.size()) {
            char spec = format[++fi];
            int width = (spec == 'Y') ? 4 : 2;
            if (ti + width > text.size())
                throw Error(ErrorKind::Data, strfmt("date '%s' does not match format '%s'", text.c_str(), format.c_str()));
            int value = 0;
            for (int k = 0; k < width; ++k) {
                char c = text[ti + k];
                if (c < '0' || c > '9')
                    throw Error(ErrorKind::Data, strfmt("date '%s' does not match format '%s'", text.c_str(), format.c_str()));
                value = value * 10 + (c - '0');
            }
            ti += width;
            switch (spec) {
                case 'Y': y = value; break;
                case 'm': mo = value; break;
                case 'd': da = value; break;
                default:
                    throw Error(ErrorKind::Parameter, strfmt("unsupported date format specifier '%%%c'", spec));
            }
        } else {
            if (ti >= text.size() || text[ti] != format[fi])
                throw Error(ErrorKind::Data, strfmt("date '%s' does not match format '%s'", text.c_str(), format.c_str()));
            ++ti;
        }
    }
    if (ti != text.size() || y < 0 || mo < 0 || da < 0 || !is_valid_date(y, mo, da))
        throw Error(ErrorKind::Data, strfmt("invalid date '%s'", text.c_str()));
    return Date{y, mo, da};
}

std::string format_date(const Date& d) { return strfmt("%04d-%02d-%02d", d.year, d.month, d.day); }

Date add_years(const Date& d, int years) {
    Date out = d;
    out.year += years;
    int dim = days_in_month(out.year, out.month);
    if (out.day > dim) out.day = dim;
    return out;
}

}  // namespace scenalloc
