#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace thermocast {

class WindowedDataset;

// Interface the evaluation and uncertainty modules depend on. `window` is a
// row-major [L x m] block of raw (unscaled) main features, `anc_window` a
// [L x k] block of binary indicators; outputs are degrees Fahrenheit.
class Forecaster {
public:
    virtual ~Forecaster() = default;

    virtual int horizon() const = 0;
    virtual std::string tag() const = 0;

    // Deterministic point forecast (dropout off).
    virtual std::vector<double> predict(
        std::span<const double> window,
        std::span<const double> anc_window) const = 0;

    // n stochastic forward passes with dropout active in inference; row r of
    // the [n x H] result is drawn from a stream derived from (seed, r), so
    // the result is independent of batching or thread count.
    virtual std::vector<double> mc_rows(std::span<const double> window,
                                        std::span<const double> anc_window,
                                        int n, std::uint64_t seed) const = 0;

    // Batched point forecasts for a window subset; the default loops over
    // predict(), implementations may batch.
    virtual std::vector<double> predict_windows(
        const WindowedDataset& ds,
        std::span<const std::int64_t> windows) const;
};

}  // namespace thermocast
