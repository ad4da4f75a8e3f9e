#include "thermocast/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "thermocast/errors.hpp"
#include "thermocast/stats.hpp"

namespace thermocast {

SampleSet mc_sample(const Forecaster& model, std::span<const double> window,
                    std::span<const double> anc_window, int n,
                    std::uint64_t seed) {
    if (n < 2)
        throw DomainError("mc_sample: need n >= 2 samples, got " +
                          std::to_string(n));
    SampleSet s;
    s.n_samples = n;
    s.horizon = model.horizon();
    s.seed = seed;
    s.samples = model.mc_rows(window, anc_window, n, seed);
    return s;
}

const char* interval_mode_name(IntervalMode m) {
    return m == IntervalMode::predictive ? "predictive" : "mean_ci";
}

IntervalMode interval_mode_from_name(const std::string& name) {
    if (name == "predictive") return IntervalMode::predictive;
    if (name == "mean_ci") return IntervalMode::mean_ci;
    throw DomainError("unknown interval mode '" + name + "'");
}

double ci_half_width(double alpha, int n, double sigma, IntervalMode mode) {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw DomainError("alpha must be in (0, 1)");
    if (mode == IntervalMode::predictive)
        return stats::normal_quantile(1.0 - alpha / 2.0) * sigma;
    if (n < 2) throw DomainError("mean_ci needs n >= 2");
    return stats::student_t_quantile(1.0 - alpha / 2.0,
                                     static_cast<double>(n - 1)) *
           sigma / std::sqrt(static_cast<double>(n));
}

namespace {

// Column statistics over sorted sample values, so any permutation of the
// rows yields bit-identical results.
void column_stats(const SampleSet& s, std::vector<double>& mu,
                  std::vector<double>& sd) {
    const int H = s.horizon;
    const int n = s.n_samples;
    mu.assign(H, 0.0);
    sd.assign(H, 0.0);
    std::vector<double> col(n);
    for (int j = 0; j < H; ++j) {
        for (int i = 0; i < n; ++i)
            col[i] = s.samples[static_cast<std::size_t>(i) * H + j];
        std::sort(col.begin(), col.end());
        const double m = stats::mean(col);
        mu[j] = m;
        sd[j] = stats::sample_std(col, m);
    }
}

}  // namespace

CiBounds ci_bounds(const SampleSet& s, double alpha, IntervalMode mode) {
    std::vector<double> mu, sd;
    column_stats(s, mu, sd);
    CiBounds b;
    b.lower.resize(mu.size());
    b.upper.resize(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) {
        const double hw = ci_half_width(alpha, s.n_samples, sd[j], mode);
        b.lower[j] = mu[j] - hw;
        b.upper[j] = mu[j] + hw;
    }
    return b;
}

ForecastWithCI derive_ci(const SampleSet& s, IntervalMode mode,
                         std::vector<double> point) {
    if (s.n_samples < 2) throw DomainError("derive_ci: need n >= 2 samples");
    if (!point.empty() && static_cast<int>(point.size()) != s.horizon)
        throw DimensionError("derive_ci: point forecast length mismatch");
    ForecastWithCI f;
    f.mode = mode;
    f.point = std::move(point);
    column_stats(s, f.mean, f.stddev);
    const int H = s.horizon;
    f.lo68.resize(H);
    f.hi68.resize(H);
    f.lo95.resize(H);
    f.hi95.resize(H);
    for (int j = 0; j < H; ++j) {
        if (f.stddev[j] == 0.0) f.degenerate = true;
        const double h68 = ci_half_width(0.32, s.n_samples, f.stddev[j], mode);
        const double h95 = ci_half_width(0.05, s.n_samples, f.stddev[j], mode);
        f.lo68[j] = f.mean[j] - h68;
        f.hi68[j] = f.mean[j] + h68;
        f.lo95[j] = f.mean[j] - h95;
        f.hi95[j] = f.mean[j] + h95;
    }
    return f;
}

double noncoverage(std::span<const double> truth,
                   std::span<const double> lower,
                   std::span<const double> upper) {
    if (truth.size() != lower.size() || truth.size() != upper.size())
        throw DimensionError("noncoverage: length mismatch");
    if (truth.empty()) throw DomainError("noncoverage: empty input");
    std::size_t outside = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] < lower[i] || truth[i] > upper[i]) ++outside;
    return static_cast<double>(outside) / static_cast<double>(truth.size());
}

}  // namespace thermocast
