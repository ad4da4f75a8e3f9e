#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "thermocast/forecaster.hpp"

namespace thermocast {

// Monte-Carlo dropout forecast samples for one window: an [n x H] matrix
// whose rows are independent stochastic forward passes.
struct SampleSet {
    int n_samples = 0;
    int horizon = 0;
    std::uint64_t seed = 0;
    std::vector<double> samples;  // row-major [n_samples x horizon]

    std::span<const double> row(int r) const {
        return {samples.data() + static_cast<std::size_t>(r) * horizon,
                static_cast<std::size_t>(horizon)};
    }
};

// Runs n stochastic passes (dropout active at inference, fresh mask per
// pass, stream per sample derived from the seed). n < 2 is a DomainError
// since the sample variance would be undefined.
SampleSet mc_sample(const Forecaster& model, std::span<const double> window,
                    std::span<const double> anc_window, int n,
                    std::uint64_t seed);

enum class IntervalMode {
    predictive,  // mu +- z_{1-a/2} * sigma  (default; spread of the forecast)
    mean_ci,     // mu +- t_{1-a/2,n-1} * sigma / sqrt(n)  (CI of the mean)
};

const char* interval_mode_name(IntervalMode m);
IntervalMode interval_mode_from_name(const std::string& name);

// Half-width of the 100*(1-alpha)% interval for a sample std `sigma` over
// `n` samples.
double ci_half_width(double alpha, int n, double sigma, IntervalMode mode);

// Per-step bounds at one alpha level. Sample order never matters: column
// statistics are accumulated over sorted values.
struct CiBounds {
    std::vector<double> lower, upper;
};
CiBounds ci_bounds(const SampleSet& s, double alpha, IntervalMode mode);

struct ForecastWithCI {
    IntervalMode mode = IntervalMode::predictive;
    std::vector<double> point;  // dropout-off prediction, kept separate
    std::vector<double> mean, stddev;
    std::vector<double> lo68, hi68, lo95, hi95;
    bool degenerate = false;  // some step had zero sample spread
};

// Assembles both the 68% (alpha=0.32) and 95% (alpha=0.05) bands.
ForecastWithCI derive_ci(const SampleSet& s, IntervalMode mode,
                         std::vector<double> point);

// Fraction of positions where truth lies strictly outside [lower, upper]
// (non-coverage; lower is better).
double noncoverage(std::span<const double> truth,
                   std::span<const double> lower,
                   std::span<const double> upper);

}  // namespace thermocast
