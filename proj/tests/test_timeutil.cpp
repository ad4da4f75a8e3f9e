#include "doctest.h"
#include "thermocast/errors.hpp"
#include "thermocast/timeutil.hpp"

using namespace thermocast;

TEST_SUITE("timeutil") {

TEST_CASE("civil date round trip across a wide range") {
    for (std::int64_t z = -200000; z <= 200000; z += 97) {
        const CivilDate d = civil_from_days(z);
        CHECK(days_from_civil(d) == z);
    }
    CHECK(days_from_civil({1970, 1, 1}) == 0);
    CHECK(days_from_civil({2021, 1, 4}) == 18631);
}

TEST_CASE("weekday is anchored correctly") {
    // 1970-01-01 was a Thursday; 2021-01-04 a Monday.
    CHECK(weekday_from_days(0) == 3);
    CHECK(weekday_from_days(days_from_civil({2021, 1, 4})) == 0);
    CHECK(weekday_from_days(days_from_civil({2021, 1, 9})) == 5);  // Saturday
    CHECK(weekday_from_days(days_from_civil({2021, 1, 10})) == 6);
}

TEST_CASE("timestamp parse and format round trip") {
    const std::string iso = "2021-03-14T15:45:00";
    const auto e = parse_timestamp(iso);
    CHECK(format_timestamp(e) == iso);
    CHECK(parse_timestamp("2021-03-14 15:45:00") == e);
    const CivilTime t = civil_from_epoch(e);
    CHECK(t.date.year == 2021);
    CHECK(t.date.month == 3);
    CHECK(t.hour == 15);
    CHECK(t.minute == 45);
}

TEST_CASE("malformed inputs throw format errors") {
    CHECK_THROWS_AS(parse_date("2021-13-01"), FormatError);
    CHECK_THROWS_AS(parse_date("2021-02-30"), FormatError);
    CHECK_THROWS_AS(parse_date("not-a-date"), FormatError);
    CHECK_THROWS_AS(parse_timestamp("2021-01-01T25:00:00"), FormatError);
    CHECK_THROWS_AS(parse_timestamp("2021-01-01"), FormatError);
    // leap day valid in a leap year
    CHECK(parse_date("2020-02-29").day == 29);
}

}  // TEST_SUITE
