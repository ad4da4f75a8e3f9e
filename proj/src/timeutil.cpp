#include "thermocast/timeutil.hpp"

#include <cstdio>

#include "thermocast/errors.hpp"

namespace thermocast {

std::int64_t days_from_civil(const CivilDate& d) {
    std::int64_t y = d.year;
    const int m = d.month;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                     static_cast<int>(d)};
}

int weekday_from_days(std::int64_t z) {
    // 1970-01-01 was a Thursday (index 3 with Monday = 0).
    return static_cast<int>(((z % 7) + 7 + 3) % 7);
}

std::int64_t epoch_from_civil(const CivilTime& t) {
    return days_from_civil(t.date) * 86400 + t.hour * 3600 + t.minute * 60 +
           t.second;
}

CivilTime civil_from_epoch(std::int64_t epoch) {
    std::int64_t days = epoch / 86400;
    std::int64_t rem = epoch % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    CivilTime t;
    t.date = civil_from_days(days);
    t.hour = static_cast<int>(rem / 3600);
    t.minute = static_cast<int>((rem % 3600) / 60);
    t.second = static_cast<int>(rem % 60);
    return t;
}

namespace {

bool valid_date(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1) return false;
    static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dmax = mdays[m - 1];
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    if (m == 2 && leap) dmax = 29;
    return d <= dmax;
}

}  // namespace

CivilDate parse_date(const std::string& s) {
    int y = 0, m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &extra) != 3 ||
        s.size() != 10 || !valid_date(y, m, d)) {
        throw FormatError("malformed date '" + s + "', expected YYYY-MM-DD");
    }
    return CivilDate{y, m, d};
}

std::int64_t parse_timestamp(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char sep = 0;
    const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo,
                              &d, &sep, &h, &mi, &sec);
    if (n != 7 || (sep != 'T' && sep != ' ') || !valid_date(y, mo, d) ||
        h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 59) {
        throw FormatError("malformed timestamp '" + s +
                          "', expected YYYY-MM-DDTHH:MM:SS");
    }
    return epoch_from_civil(CivilTime{CivilDate{y, mo, d}, h, mi, sec});
}

std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::string format_timestamp(std::int64_t epoch) {
    const CivilTime t = civil_from_epoch(epoch);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d",
                  t.date.year, t.date.month, t.date.day, t.hour, t.minute,
                  t.second);
    return buf;
}

}  // namespace thermocast
