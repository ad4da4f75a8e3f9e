#include "thermocast/windowing.hpp"

#include <cmath>

#include "thermocast/errors.hpp"

namespace thermocast {

WindowedDataset WindowedDataset::build(const RawSeries& series, int lookback,
                                       int horizon) {
    if (lookback < 1 || horizon < 1)
        throw DomainError("lookback and horizon must be >= 1");
    const auto n = static_cast<std::int64_t>(series.size());
    if (n < lookback + horizon)
        throw DomainError("series too short for windowing: need at least " +
                          std::to_string(lookback + horizon) +
                          " timestamps, got " + std::to_string(n));
    WindowedDataset ds;
    ds.lookback_ = lookback;
    ds.horizon_ = horizon;
    ds.epochs_ = series.epochs;
    ds.features_ = build_main_features(series);
    ds.ancillary_ = build_ancillary_features(series);
    ds.targets_ = series.indoor_temp;
    return ds;
}

std::span<const double> WindowedDataset::feature_row(std::int64_t row) const {
    return {features_.data() + row * kMainFeatureCount,
            static_cast<std::size_t>(kMainFeatureCount)};
}

std::span<const double> WindowedDataset::ancillary_row(
    std::int64_t row) const {
    return {ancillary_.data() + row * kAncillaryFeatureCount,
            static_cast<std::size_t>(kAncillaryFeatureCount)};
}

std::vector<double> WindowedDataset::input_window(std::int64_t w) const {
    std::vector<double> out(static_cast<std::size_t>(lookback_) *
                            kMainFeatureCount);
    std::copy_n(features_.data() + w * kMainFeatureCount, out.size(),
                out.data());
    return out;
}

std::vector<double> WindowedDataset::ancillary_window(std::int64_t w) const {
    std::vector<double> out(static_cast<std::size_t>(lookback_) *
                            kAncillaryFeatureCount);
    std::copy_n(ancillary_.data() + w * kAncillaryFeatureCount, out.size(),
                out.data());
    return out;
}

std::vector<double> WindowedDataset::target_window(std::int64_t w) const {
    std::vector<double> out(static_cast<std::size_t>(horizon_));
    std::copy_n(targets_.data() + w + lookback_, out.size(), out.data());
    return out;
}

SplitCounts split_counts(std::int64_t total_timestamps,
                         const SplitSpec& spec) {
    if (spec.train_ratio <= 0.0 || spec.train_ratio > 1.0)
        throw DomainError("train_ratio must be in (0, 1]");
    if (spec.validation_fraction < 0.0 || spec.validation_fraction >= 1.0)
        throw DomainError("validation_fraction must be in [0, 1)");
    SplitCounts c;
    // Small epsilon so decimal ratios hit their intended integer boundary.
    c.train_timestamps = static_cast<std::int64_t>(
        std::floor(static_cast<double>(total_timestamps) * spec.train_ratio +
                   1e-9));
    c.test_timestamps = total_timestamps - c.train_timestamps;
    c.validation_timestamps = static_cast<std::int64_t>(
        std::floor(static_cast<double>(c.train_timestamps) *
                       spec.validation_fraction +
                   1e-9));
    return c;
}

SplitResult split(const WindowedDataset& ds, const SplitSpec& spec) {
    SplitResult r;
    r.counts = split_counts(ds.n_rows(), spec);
    const std::int64_t span = ds.lookback() + ds.horizon();
    const std::int64_t fit_end =
        r.counts.train_timestamps - r.counts.validation_timestamps;
    const std::int64_t train_end = r.counts.train_timestamps;
    const std::int64_t total = ds.n_rows();
    for (std::int64_t w = 0; w < ds.n_windows(); ++w) {
        const std::int64_t lo = w;
        const std::int64_t hi = w + span;  // exclusive
        if (hi <= fit_end)
            r.train.push_back(w);
        else if (lo >= fit_end && hi <= train_end)
            r.validation.push_back(w);
        else if (lo >= train_end && hi <= total)
            r.test.push_back(w);
        // otherwise the window straddles a boundary and belongs to no split
    }
    if (r.train.empty()) throw DomainError("train split is empty");
    if (r.counts.validation_timestamps > 0 && r.validation.empty())
        throw DomainError("validation split is empty");
    if (r.test.empty()) throw DomainError("test split is empty");
    return r;
}

}  // namespace thermocast
