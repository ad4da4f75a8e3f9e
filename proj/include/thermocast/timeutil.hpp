#pragma once

#include <cstdint>
#include <string>

namespace thermocast {

// Minimal proleptic-Gregorian calendar arithmetic on a fixed local clock.
// Timestamps are epoch seconds (1970-01-01 00:00:00 = 0). No time zones,
// no leap seconds; the series clock is assumed local and uniform.

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
};

struct CivilTime {
    CivilDate date;
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Days since 1970-01-01 (Howard Hinnant's days_from_civil).
std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t z);

// 0 = Monday ... 6 = Sunday.
int weekday_from_days(std::int64_t z);

std::int64_t epoch_from_civil(const CivilTime& t);
CivilTime civil_from_epoch(std::int64_t epoch);

// "YYYY-MM-DD"; throws FormatError on malformed input.
CivilDate parse_date(const std::string& s);
// "YYYY-MM-DDTHH:MM:SS" (a single space separator is also accepted).
std::int64_t parse_timestamp(const std::string& s);

std::string format_date(const CivilDate& d);
std::string format_timestamp(std::int64_t epoch);

constexpr std::int64_t kStepSeconds = 15 * 60;  // 15-minute sampling interval
constexpr int kStepsPerDay = 96;

}  // namespace thermocast
