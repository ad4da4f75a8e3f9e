#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "thermocast/series.hpp"

namespace thermocast {

// Sliding-window view over a series: window w reads feature rows
// [w, w+L) and is scored against target rows [w+L, w+L+H). Rows are stored
// once and shared by all windows (stride-1 windows overlap heavily).
class WindowedDataset {
public:
    static WindowedDataset build(const RawSeries& series, int lookback,
                                 int horizon);

    int lookback() const { return lookback_; }
    int horizon() const { return horizon_; }
    int n_features() const { return kMainFeatureCount; }
    int n_ancillary() const { return kAncillaryFeatureCount; }

    std::int64_t n_rows() const {
        return static_cast<std::int64_t>(epochs_.size());
    }
    // S = rows - L - H + 1
    std::int64_t n_windows() const {
        return n_rows() - lookback_ - horizon_ + 1;
    }

    std::int64_t row_epoch(std::int64_t row) const { return epochs_[row]; }
    std::span<const std::int64_t> epochs() const { return epochs_; }
    std::span<const double> feature_row(std::int64_t row) const;
    std::span<const double> ancillary_row(std::int64_t row) const;
    double target(std::int64_t row) const { return targets_[row]; }
    std::span<const double> targets() const { return targets_; }

    // Window accessors (index map: window w starts at source row w).
    std::int64_t window_start_epoch(std::int64_t w) const {
        return epochs_[w];
    }
    std::int64_t target_epoch(std::int64_t w, int step) const {
        return epochs_[w + lookback_ + step];
    }
    // Contiguous [L x m] / [L x k] copies for the single-window API.
    std::vector<double> input_window(std::int64_t w) const;
    std::vector<double> ancillary_window(std::int64_t w) const;
    std::vector<double> target_window(std::int64_t w) const;

private:
    int lookback_ = 0;
    int horizon_ = 0;
    std::vector<std::int64_t> epochs_;
    std::vector<double> features_;   // [rows x m]
    std::vector<double> ancillary_;  // [rows x k]
    std::vector<double> targets_;    // [rows]
};

struct SplitSpec {
    double train_ratio = 0.8;          // train : test over timestamps
    double validation_fraction = 0.2;  // of the training timestamps
};

struct SplitCounts {
    std::int64_t train_timestamps = 0;       // includes validation
    std::int64_t validation_timestamps = 0;  // final slice of train
    std::int64_t test_timestamps = 0;
};

// Timestamp-level boundaries (floor of the ratios).
SplitCounts split_counts(std::int64_t total_timestamps, const SplitSpec& spec);

struct SplitResult {
    SplitCounts counts;
    // Window indices whose full [input, target] span lies inside the slice;
    // windows straddling a boundary belong to none.
    std::vector<std::int64_t> train, validation, test;
};

// Chronological partition; throws DomainError if any split ends up empty.
SplitResult split(const WindowedDataset& ds, const SplitSpec& spec);

}  // namespace thermocast
