#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "thermocast/forecaster.hpp"
#include "thermocast/timeutil.hpp"
#include "thermocast/uncertainty.hpp"
#include "thermocast/windowing.hpp"

namespace thermocast {

struct ErrorStats {
    double rmse = 0.0;
    double mae = 0.0;
    double mape = 0.0;  // percent, zero-truth entries excluded
    std::int64_t count = 0;
    std::int64_t mape_excluded = 0;
};

// RMSE / MAE / MAPE over aligned prediction-truth pairs. Throws DomainError
// on empty input or when every truth value is zero (MAPE undefined).
ErrorStats error_all(std::span<const double> pred,
                     std::span<const double> truth);

// +-2-step band around each day's ground-truth extremum.
struct ExtremumWindow {
    enum class Kind { max, min };
    CivilDate date;
    Kind kind = Kind::max;
    std::int64_t center = 0;               // index into the series
    std::vector<std::int64_t> members;     // center +- 2, clipped to the day
    bool partial_day = false;              // day had fewer than 96 steps
};

// Per calendar day, one max and one min window over the ground truth
// (ties broken toward the earliest timestamp). Days cut off by the series
// boundaries are processed but flagged partial.
std::vector<ExtremumWindow> extremum_windows(
    std::span<const std::int64_t> epochs, std::span<const double> truth);

// error_all restricted to the union of window member indices.
ErrorStats error_extremum(std::span<const double> pred,
                          std::span<const double> truth,
                          const std::vector<ExtremumWindow>& windows);

enum class EvalMode { one_step, multi_step };
const char* eval_mode_name(EvalMode m);
EvalMode eval_mode_from_name(const std::string& name);

struct CiConfig {
    int mc_samples = 100;
    std::uint64_t seed = 0;
    IntervalMode mode = IntervalMode::predictive;
};

struct MetricBlock {
    ErrorStats all;
    ErrorStats extremum;
    double noncoverage68 = 0.0;
    double noncoverage95 = 0.0;
};

struct MonthEntry {
    int year = 0;
    int month = 0;
    MetricBlock block;
};

struct EvaluationReport {
    std::string model_tag;
    EvalMode mode = EvalMode::one_step;
    std::uint64_t split_hash = 0;  // fingerprint of the scored test span
    int mc_samples = 0;
    IntervalMode interval_mode = IntervalMode::predictive;
    std::uint64_t mc_seed = 0;
    MetricBlock overall;
    std::vector<MonthEntry> months;  // chronological; exhaust the test span
};

// Scores a model over the test windows. one_step splices the first step of
// every window into a single 15-minute-ahead series; multi_step scores every
// (window, step) pair once. Both attach MC-dropout non-coverage at the 68%
// and 95% levels and group results by the calendar month of the forecast
// target.
EvaluationReport evaluate(const Forecaster& model, const WindowedDataset& ds,
                          std::span<const std::int64_t> test_windows,
                          EvalMode mode, const CiConfig& ci);

struct ComparisonRow {
    std::string metric;
    double candidate = 0.0;
    double baseline = 0.0;
    double delta = 0.0;   // candidate - baseline
    bool improved = false;  // strictly lower is better for every metric here
};

struct ComparisonTable {
    std::string candidate_tag, baseline_tag;
    EvalMode mode = EvalMode::one_step;
    std::vector<ComparisonRow> rows;
};

// Side-by-side deltas; both reports must come from the same test split and
// mode (ContractError otherwise).
ComparisonTable compare(const EvaluationReport& candidate,
                        const EvaluationReport& baseline);

std::string report_to_json(const EvaluationReport& r);
// <prefix>_report.json plus flat per-figure tables
// (<prefix>_monthly_errors.csv, <prefix>_monthly_coverage.csv).
void write_report_files(const EvaluationReport& r, const std::string& dir,
                        const std::string& prefix);
std::string comparison_to_text(const ComparisonTable& t);
std::string comparison_to_json(const ComparisonTable& t);

}  // namespace thermocast
