#include "thermocast/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "thermocast/errors.hpp"
#include "thermocast/rng.hpp"

namespace thermocast {

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::vector<double>* columns(const RawSeries& s, int i) {
    const std::vector<double>* cols[] = {
        &s.outside_temp, &s.humidity,   &s.wind_speed,
        &s.pressure,     &s.wx_fog,     &s.wx_rain,
        &s.wx_snow,      &s.occupancy,  &s.is_weekend,
        &s.is_major_holiday, &s.is_minor_holiday, &s.indoor_temp};
    return cols[i];
}

std::vector<double>* columns(RawSeries& s, int i) {
    return const_cast<std::vector<double>*>(
        columns(static_cast<const RawSeries&>(s), i));
}

constexpr int kCsvValueColumns = 12;

const char* kColumnNames[] = {
    "outside_temp", "humidity",   "wind_speed",       "pressure",
    "wx_fog",       "wx_rain",    "wx_snow",          "occupancy",
    "is_weekend",   "is_major_holiday", "is_minor_holiday", "indoor_temp"};

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

void RawSeries::resize(std::size_t n) {
    epochs.resize(n);
    for (int i = 0; i < kCsvValueColumns; ++i) columns(*this, i)->resize(n);
}

void validate_series(const RawSeries& s, const SeriesBounds& bounds) {
    const std::size_t n = s.size();
    if (n == 0) throw ValidationError("series is empty");
    const std::vector<double>* cols[] = {
        &s.outside_temp, &s.humidity,   &s.wind_speed,
        &s.pressure,     &s.wx_fog,     &s.wx_rain,
        &s.wx_snow,      &s.occupancy,  &s.is_weekend,
        &s.is_major_holiday, &s.is_minor_holiday, &s.indoor_temp};
    for (int c = 0; c < kCsvValueColumns; ++c) {
        if (cols[c]->size() != n)
            throw ValidationError(std::string("column ") + kColumnNames[c] +
                                  " length mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite((*cols[c])[i]))
                throw ValidationError(std::string("non-finite value in ") +
                                      kColumnNames[c] + " at row " +
                                      std::to_string(i + 1));
        }
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (s.epochs[i] - s.epochs[i - 1] != kStepSeconds)
            throw FormatError("non-uniform timestamp spacing at row " +
                              std::to_string(i + 1) + " (" +
                              format_timestamp(s.epochs[i - 1]) + " -> " +
                              format_timestamp(s.epochs[i]) + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_binary(s.is_weekend[i]) || !is_binary(s.is_major_holiday[i]) ||
            !is_binary(s.is_minor_holiday[i]))
            throw ValidationError("non-binary ancillary feature at row " +
                                  std::to_string(i + 1));
        if (s.indoor_temp[i] < bounds.indoor_min ||
            s.indoor_temp[i] > bounds.indoor_max)
            throw ValidationError(
                "indoor_temp " + std::to_string(s.indoor_temp[i]) +
                " out of bounds [" + std::to_string(bounds.indoor_min) + ", " +
                std::to_string(bounds.indoor_max) + "] at row " +
                std::to_string(i + 1));
    }
}

const std::vector<std::string>& main_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"outside_temp", "humidity",
                                      "wind_speed",   "pressure",
                                      "wx_fog",       "wx_rain",
                                      "wx_snow",      "occupancy",
                                      "tod_sin",      "tod_cos"};
        for (int d = 0; d < 7; ++d) v.push_back("dow_" + std::to_string(d));
        return v;
    }();
    return names;
}

std::vector<double> build_main_features(const RawSeries& s) {
    const std::size_t n = s.size();
    std::vector<double> out(n * kMainFeatureCount);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = out.data() + i * kMainFeatureCount;
        row[0] = s.outside_temp[i];
        row[1] = s.humidity[i];
        row[2] = s.wind_speed[i];
        row[3] = s.pressure[i];
        row[4] = s.wx_fog[i];
        row[5] = s.wx_rain[i];
        row[6] = s.wx_snow[i];
        row[7] = s.occupancy[i];
        const std::int64_t sec_of_day =
            ((s.epochs[i] % 86400) + 86400) % 86400;
        const double frac = static_cast<double>(sec_of_day) / 86400.0;
        row[8] = std::sin(2.0 * kPi * frac);
        row[9] = std::cos(2.0 * kPi * frac);
        const int dow = weekday_from_days(s.epochs[i] >= 0
                                              ? s.epochs[i] / 86400
                                              : (s.epochs[i] - 86399) / 86400);
        for (int d = 0; d < 7; ++d) row[10 + d] = d == dow ? 1.0 : 0.0;
    }
    return out;
}

std::vector<double> build_ancillary_features(const RawSeries& s) {
    const std::size_t n = s.size();
    std::vector<double> out(n * kAncillaryFeatureCount);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = out.data() + i * kAncillaryFeatureCount;
        row[0] = s.is_weekend[i];
        row[1] = s.is_major_holiday[i];
        row[2] = s.is_minor_holiday[i];
    }
    return out;
}

std::vector<Holiday> load_holidays(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open holiday list '" + path + "'");
    std::vector<Holiday> holidays;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw FormatError("holiday list line " + std::to_string(lineno) +
                              ": expected 'YYYY-MM-DD,major|minor'");
        Holiday h;
        h.date = parse_date(line.substr(0, comma));
        const std::string kind = line.substr(comma + 1);
        if (kind == "major")
            h.kind = HolidayKind::major;
        else if (kind == "minor")
            h.kind = HolidayKind::minor;
        else
            throw FormatError("holiday list line " + std::to_string(lineno) +
                              ": unknown kind '" + kind + "'");
        holidays.push_back(h);
    }
    return holidays;
}

double hvac_waveform(int step_of_day, double amplitude) {
    // Peak at step 0 (midnight, HVAC off), trough at step 56 (14:00).
    constexpr int kTrough = 56;
    if (step_of_day <= kTrough)
        return amplitude * std::cos(kPi * step_of_day / kTrough);
    return amplitude *
           std::cos(kPi * (kStepsPerDay - step_of_day) /
                    (kStepsPerDay - kTrough));
}

RawSeries generate_synthetic(const SynthConfig& cfg) {
    if (cfg.days < 2)
        throw DomainError("synthetic generator requires days >= 2, got " +
                          std::to_string(cfg.days));
    const std::size_t n = static_cast<std::size_t>(cfg.days) * kStepsPerDay;
    RawSeries s;
    s.resize(n);

    std::set<std::int64_t> major_days, minor_days;
    for (const auto& h : cfg.holidays) {
        (h.kind == HolidayKind::major ? major_days : minor_days)
            .insert(days_from_civil(h.date));
    }

    Rng weather_rng(cfg.seed, "synth/weather");
    Rng indoor_rng(cfg.seed, "synth/indoor");
    Rng occ_rng(cfg.seed, "synth/occupancy");

    const std::int64_t start_day = days_from_civil(cfg.start_date);
    const std::int64_t start_epoch = start_day * 86400;

    double out_anom = 0.0;      // AR(1) outside-temperature anomaly
    double pressure_anom = 0.0;
    const double out_base = 55.0;

    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t epoch =
            start_epoch + static_cast<std::int64_t>(i) * kStepSeconds;
        s.epochs[i] = epoch;
        const std::int64_t day = epoch / 86400;
        const int step = static_cast<int>(i % kStepsPerDay);
        const int dow = weekday_from_days(day);
        const int day_of_year =
            static_cast<int>(day - days_from_civil({civil_from_days(day).year,
                                                    1, 1}));
        const double tod = static_cast<double>(step) / kStepsPerDay;

        const bool weekend = dow >= 5;
        const bool major = major_days.count(day) > 0;
        const bool minor = minor_days.count(day) > 0;

        // outside weather
        out_anom = 0.98 * out_anom + weather_rng.normal(0.0, 0.6);
        const double seasonal =
            12.0 * std::sin(2.0 * kPi * (day_of_year - 100) / 365.0);
        const double diurnal = 8.0 * std::sin(2.0 * kPi * (tod - 0.375));
        const double outside = out_base + seasonal + diurnal + out_anom;
        s.outside_temp[i] = outside;

        const double hum =
            62.0 + 18.0 * std::sin(2.0 * kPi * (day_of_year + 40) / 365.0) +
            8.0 * std::sin(2.0 * kPi * (tod + 0.2)) +
            weather_rng.normal(0.0, 3.0);
        s.humidity[i] = std::clamp(hum, 5.0, 100.0);
        s.wind_speed[i] = std::max(
            0.0, 7.0 + 4.0 * std::sin(2.0 * kPi * tod) +
                     weather_rng.normal(0.0, 2.0));
        pressure_anom = 0.995 * pressure_anom + weather_rng.normal(0.0, 0.4);
        s.pressure[i] = 1013.0 + pressure_anom;

        s.wx_rain[i] = s.humidity[i] > 86.0 ? 1.0 : 0.0;
        s.wx_snow[i] = (s.wx_rain[i] > 0.0 && outside < 32.0) ? 1.0 : 0.0;
        s.wx_fog[i] = (s.humidity[i] > 92.0 && tod < 0.33) ? 1.0 : 0.0;

        // occupancy: office-hours bump, damped on weekends and (mildly)
        // holidays; noisy so calendar state is not trivially recoverable
        const double hours = tod * 24.0;
        double occ = 0.0;
        if (hours >= 6.0 && hours <= 20.0)
            occ = std::exp(-0.5 * std::pow((hours - 12.5) / 3.2, 2.0));
        double factor = weekend ? 0.15 : 1.0;
        if (major || minor) factor *= 1.0 - cfg.occupancy_holiday_dip;
        occ = occ * factor + occ_rng.normal(0.0, 0.05);
        s.occupancy[i] = std::clamp(occ, 0.0, 1.2);

        s.is_weekend[i] = weekend ? 1.0 : 0.0;
        s.is_major_holiday[i] = major ? 1.0 : 0.0;
        s.is_minor_holiday[i] = minor ? 1.0 : 0.0;

        double indoor = cfg.base_indoor +
                        hvac_waveform(step, cfg.daily_amplitude) +
                        (weekend ? cfg.weekend_offset : 0.0) +
                        (major ? cfg.major_holiday_offset : 0.0) +
                        (minor ? cfg.minor_holiday_offset : 0.0) +
                        cfg.weather_coupling * (outside - out_base);
        if (cfg.noise_sigma > 0.0)
            indoor += indoor_rng.normal(0.0, cfg.noise_sigma);
        s.indoor_temp[i] = indoor;
    }
    return s;
}

namespace {

double parse_number(const std::string& field, std::size_t lineno,
                    const char* column) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw FormatError("row " + std::to_string(lineno) +
                          ": unparseable number '" + field + "' in column " +
                          column);
    return v;
}

std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

std::string csv_header() {
    std::string h = "timestamp";
    for (int c = 0; c < kCsvValueColumns; ++c) {
        h += ',';
        h += kColumnNames[c];
    }
    return h;
}

RawSeries ingest_csv(const std::string& path, const IngestOptions& opts,
                     IngestReport* report) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != csv_header())
        throw FormatError("unexpected CSV header; expected '" + csv_header() +
                          "'");

    RawSeries s;
    IngestReport rep;
    std::size_t lineno = 1;
    std::vector<std::string> fields;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fields.clear();
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (fields.size() != 1 + kCsvValueColumns)
            throw FormatError("row " + std::to_string(lineno) + ": expected " +
                              std::to_string(1 + kCsvValueColumns) +
                              " fields, got " + std::to_string(fields.size()));
        const std::int64_t epoch = parse_timestamp(fields[0]);
        if (!s.epochs.empty()) {
            const std::int64_t gap = epoch - s.epochs.back();
            if (gap <= 0)
                throw FormatError("row " + std::to_string(lineno) +
                                  ": timestamps not strictly increasing");
            if (gap != kStepSeconds) {
                if (gap % kStepSeconds != 0 || !opts.forward_fill)
                    throw FormatError(
                        "row " + std::to_string(lineno) + ": " +
                        std::to_string(gap / 60) + "-minute gap after " +
                        format_timestamp(s.epochs.back()));
                // forward-fill the gap, recomputing calendar-derived flags
                const std::size_t prev = s.size() - 1;
                for (std::int64_t e = s.epochs.back() + kStepSeconds;
                     e < epoch; e += kStepSeconds) {
                    s.resize(s.size() + 1);
                    const std::size_t j = s.size() - 1;
                    s.epochs[j] = e;
                    for (int c = 0; c < kCsvValueColumns; ++c)
                        (*columns(s, c))[j] = (*columns(s, c))[prev];
                    s.is_weekend[j] =
                        weekday_from_days(e / 86400) >= 5 ? 1.0 : 0.0;
                    ++rep.rows_imputed;
                }
            }
        }
        s.resize(s.size() + 1);
        const std::size_t j = s.size() - 1;
        s.epochs[j] = epoch;
        for (int c = 0; c < kCsvValueColumns; ++c)
            (*columns(s, c))[j] =
                parse_number(fields[1 + c], lineno, kColumnNames[c]);
        ++rep.rows_read;
    }
    validate_series(s, opts.bounds);
    if (report) *report = rep;
    return s;
}

void export_csv(const RawSeries& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << csv_header() << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << format_timestamp(s.epochs[i]);
        for (int c = 0; c < kCsvValueColumns; ++c)
            out << ',' << format_number((*columns(s, c))[i]);
        out << '\n';
    }
    if (!out) throw FormatError("write failure on '" + path + "'");
}

}  // namespace thermocast
