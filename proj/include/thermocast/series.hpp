#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermocast/timeutil.hpp"

namespace thermocast {

// A validated, uniformly sampled (15-minute) building-climate series.
// Main features are the covariates fed to the main network; the three
// calendar indicator columns are the ancillary features; indoor_temp is the
// forecast target.
struct RawSeries {
    std::vector<std::int64_t> epochs;

    // main covariates
    std::vector<double> outside_temp;
    std::vector<double> humidity;
    std::vector<double> wind_speed;
    std::vector<double> pressure;
    std::vector<double> wx_fog, wx_rain, wx_snow;  // weather-status flags
    std::vector<double> occupancy;

    // ancillary indicators, each strictly 0 or 1
    std::vector<double> is_weekend;
    std::vector<double> is_major_holiday;
    std::vector<double> is_minor_holiday;

    // target (degrees Fahrenheit)
    std::vector<double> indoor_temp;

    std::size_t size() const { return epochs.size(); }
    void resize(std::size_t n);
};

// Physical-bounds and schema validation; throws FormatError / ValidationError.
struct SeriesBounds {
    double indoor_min = 40.0;
    double indoor_max = 100.0;
};
void validate_series(const RawSeries& s, const SeriesBounds& bounds = {});

// 8 raw covariates + sin/cos time-of-day + 7-way day-of-week one-hot.
constexpr int kMainFeatureCount = 17;
constexpr int kAncillaryFeatureCount = 3;

const std::vector<std::string>& main_feature_names();

// Row-major [n x kMainFeatureCount]; the time encodings are derived from the
// timestamp column.
std::vector<double> build_main_features(const RawSeries& s);
// Row-major [n x kAncillaryFeatureCount].
std::vector<double> build_ancillary_features(const RawSeries& s);

enum class HolidayKind { major, minor };

struct Holiday {
    CivilDate date;
    HolidayKind kind = HolidayKind::major;
};

// One `YYYY-MM-DD,major|minor` entry per line; '#' comments allowed.
std::vector<Holiday> load_holidays(const std::string& path);

// Synthetic building-climate generator: an HVAC-schedule daily waveform
// (warm overnight while the HVAC is off, coolest mid-afternoon) plus
// weekend/holiday setback offsets, a weather-coupled term, and Gaussian
// noise. Deterministic per seed.
struct SynthConfig {
    int days = 160;
    std::uint64_t seed = 7;
    CivilDate start_date{2021, 1, 4};  // a Monday
    std::vector<Holiday> holidays;

    double base_indoor = 71.0;
    double daily_amplitude = 2.0;     // waveform peak at 00:00, trough at 14:00
    double weekend_offset = 2.5;      // additive, whole weekend day
    double major_holiday_offset = 6.0;
    double minor_holiday_offset = 3.0;
    double weather_coupling = 0.15;   // indoor response to outside anomaly
    double noise_sigma = 0.5;
    double occupancy_holiday_dip = 0.15;
};

RawSeries generate_synthetic(const SynthConfig& cfg);

// Deterministic daily waveform used by the generator (step in [0, 96)).
double hvac_waveform(int step_of_day, double amplitude);

struct IngestOptions {
    bool forward_fill = false;  // impute timestamp gaps by forward fill
    SeriesBounds bounds;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_imputed = 0;
};

// Strict CSV reader; uniform spacing enforced (gaps are a FormatError unless
// forward_fill is set, in which case imputed rows are counted in the report).
RawSeries ingest_csv(const std::string& path, const IngestOptions& opts = {},
                     IngestReport* report = nullptr);

void export_csv(const RawSeries& s, const std::string& path);
std::string csv_header();

}  // namespace thermocast
