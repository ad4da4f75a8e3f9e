#include "thermocast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "thermocast/errors.hpp"
#include "thermocast/rng.hpp"

#include "json.hpp"

namespace thermocast {

namespace {

struct ErrorAccum {
    double sum_sq = 0.0, sum_abs = 0.0, sum_ape = 0.0;
    std::int64_t n = 0, mape_n = 0;

    void add(double pred, double truth) {
        const double err = pred - truth;
        sum_sq += err * err;
        sum_abs += std::fabs(err);
        ++n;
        if (truth != 0.0) {
            sum_ape += std::fabs(err) / std::fabs(truth);
            ++mape_n;
        }
    }

    ErrorStats stats() const {
        if (n == 0) throw DomainError("error metrics over empty input");
        if (mape_n == 0)
            throw DomainError("MAPE undefined: all truth values are zero");
        ErrorStats s;
        s.rmse = std::sqrt(sum_sq / static_cast<double>(n));
        s.mae = sum_abs / static_cast<double>(n);
        s.mape = 100.0 * sum_ape / static_cast<double>(mape_n);
        s.count = n;
        s.mape_excluded = n - mape_n;
        return s;
    }
};

}  // namespace

ErrorStats error_all(std::span<const double> pred,
                     std::span<const double> truth) {
    if (pred.size() != truth.size())
        throw DimensionError("error_all: length mismatch " +
                             std::to_string(pred.size()) + " vs " +
                             std::to_string(truth.size()));
    if (pred.empty()) throw DomainError("error_all: empty input");
    ErrorAccum acc;
    for (std::size_t i = 0; i < pred.size(); ++i) acc.add(pred[i], truth[i]);
    return acc.stats();
}

std::vector<ExtremumWindow> extremum_windows(
    std::span<const std::int64_t> epochs, std::span<const double> truth) {
    if (epochs.size() != truth.size())
        throw DimensionError("extremum_windows: length mismatch");
    std::vector<ExtremumWindow> out;
    std::size_t i = 0;
    while (i < epochs.size()) {
        const std::int64_t day = epochs[i] / 86400;
        std::size_t j = i;
        std::int64_t arg_max = static_cast<std::int64_t>(i);
        std::int64_t arg_min = static_cast<std::int64_t>(i);
        while (j < epochs.size() && epochs[j] / 86400 == day) {
            if (truth[j] > truth[arg_max]) arg_max = static_cast<std::int64_t>(j);
            if (truth[j] < truth[arg_min]) arg_min = static_cast<std::int64_t>(j);
            ++j;
        }
        const bool partial = (j - i) < static_cast<std::size_t>(kStepsPerDay);
        const auto day_lo = static_cast<std::int64_t>(i);
        const auto day_hi = static_cast<std::int64_t>(j) - 1;
        auto make_window = [&](std::int64_t center, ExtremumWindow::Kind kind) {
            ExtremumWindow w;
            w.date = civil_from_days(day);
            w.kind = kind;
            w.center = center;
            w.partial_day = partial;
            const std::int64_t lo = std::max(day_lo, center - 2);
            const std::int64_t hi = std::min(day_hi, center + 2);
            for (std::int64_t m = lo; m <= hi; ++m) w.members.push_back(m);
            return w;
        };
        out.push_back(make_window(arg_max, ExtremumWindow::Kind::max));
        out.push_back(make_window(arg_min, ExtremumWindow::Kind::min));
        i = j;
    }
    return out;
}

ErrorStats error_extremum(std::span<const double> pred,
                          std::span<const double> truth,
                          const std::vector<ExtremumWindow>& windows) {
    if (pred.size() != truth.size())
        throw DimensionError("error_extremum: length mismatch");
    std::vector<char> member(truth.size(), 0);
    for (const auto& w : windows)
        for (auto m : w.members) member[static_cast<std::size_t>(m)] = 1;
    ErrorAccum acc;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (member[i]) acc.add(pred[i], truth[i]);
    if (acc.n == 0)
        throw DomainError("error_extremum: empty window union");
    return acc.stats();
}

const char* eval_mode_name(EvalMode m) {
    return m == EvalMode::one_step ? "one_step" : "multi_step";
}

EvalMode eval_mode_from_name(const std::string& name) {
    if (name == "one_step") return EvalMode::one_step;
    if (name == "multi_step") return EvalMode::multi_step;
    throw DomainError("unknown evaluation mode '" + name + "'");
}

namespace {

struct PairAccum {
    ErrorAccum all;
    ErrorAccum extremum;
    std::int64_t out68 = 0, out95 = 0, cov_n = 0;

    void add(double pred, double truth, bool in_extremum, bool outside68,
             bool outside95) {
        all.add(pred, truth);
        if (in_extremum) extremum.add(pred, truth);
        out68 += outside68 ? 1 : 0;
        out95 += outside95 ? 1 : 0;
        ++cov_n;
    }

    MetricBlock block() const {
        MetricBlock b;
        b.all = all.stats();
        b.extremum = extremum.stats();
        b.noncoverage68 =
            static_cast<double>(out68) / static_cast<double>(cov_n);
        b.noncoverage95 =
            static_cast<double>(out95) / static_cast<double>(cov_n);
        return b;
    }
};

std::uint64_t fnv_bytes(std::uint64_t h, const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

EvaluationReport evaluate(const Forecaster& model, const WindowedDataset& ds,
                          std::span<const std::int64_t> test_windows,
                          EvalMode mode, const CiConfig& ci) {
    if (test_windows.empty()) throw DomainError("evaluate: empty test split");
    const int L = ds.lookback();
    const int H = model.horizon();
    if (H != ds.horizon())
        throw ContractError("evaluate: model horizon differs from dataset");

    // Target-row range scored in this mode (contiguous for chronological
    // splits). one_step touches only step 0 of each window.
    const auto [min_w, max_w] =
        std::minmax_element(test_windows.begin(), test_windows.end());
    const std::int64_t row_lo = *min_w + L;
    const std::int64_t row_hi =
        mode == EvalMode::one_step ? *max_w + L : *max_w + L + H - 1;
    const auto span_len = static_cast<std::size_t>(row_hi - row_lo + 1);

    std::vector<std::int64_t> span_epochs(span_len);
    std::vector<double> span_truth(span_len);
    for (std::size_t i = 0; i < span_len; ++i) {
        span_epochs[i] = ds.row_epoch(row_lo + static_cast<std::int64_t>(i));
        span_truth[i] = ds.target(row_lo + static_cast<std::int64_t>(i));
    }

    // Ground-truth extremum membership over the scored span.
    const auto windows = extremum_windows(span_epochs, span_truth);
    std::vector<char> member(span_len, 0);
    for (const auto& w : windows)
        for (auto m : w.members) member[static_cast<std::size_t>(m)] = 1;

    // Deterministic point forecasts for every test window.
    const auto preds = model.predict_windows(ds, test_windows);

    EvaluationReport report;
    report.model_tag = model.tag();
    report.mode = mode;
    report.mc_samples = ci.mc_samples;
    report.interval_mode = ci.mode;
    report.mc_seed = ci.seed;

    std::uint64_t h = 1469598103934665603ull;
    h = fnv_bytes(h, &L, sizeof(L));
    const int dsH = ds.horizon();
    h = fnv_bytes(h, &dsH, sizeof(dsH));
    h = fnv_bytes(h, span_epochs.data(),
                  span_epochs.size() * sizeof(std::int64_t));
    h = fnv_bytes(h, span_truth.data(), span_truth.size() * sizeof(double));
    report.split_hash = h;

    PairAccum overall;
    std::map<std::pair<int, int>, PairAccum> by_month;

    for (std::size_t i = 0; i < test_windows.size(); ++i) {
        const std::int64_t w = test_windows[i];
        const auto window = ds.input_window(w);
        const auto anc = ds.ancillary_window(w);
        const SampleSet samples =
            mc_sample(model, window, anc, ci.mc_samples,
                      Rng::derive(Rng::derive(ci.seed, 0x6d635f6576616cull),
                                  static_cast<std::uint64_t>(w)));
        const ForecastWithCI f = derive_ci(samples, ci.mode, {});

        const int steps = mode == EvalMode::one_step ? 1 : H;
        for (int s = 0; s < steps; ++s) {
            const std::int64_t row = w + L + s;
            const auto si = static_cast<std::size_t>(row - row_lo);
            const double truth = span_truth[si];
            const double pred = preds[i * static_cast<std::size_t>(H) +
                                      static_cast<std::size_t>(s)];
            const bool o68 = truth < f.lo68[s] || truth > f.hi68[s];
            const bool o95 = truth < f.lo95[s] || truth > f.hi95[s];
            const CivilDate date = civil_from_days(span_epochs[si] / 86400);
            overall.add(pred, truth, member[si], o68, o95);
            by_month[{date.year, date.month}].add(pred, truth, member[si],
                                                  o68, o95);
        }
    }

    report.overall = overall.block();
    for (const auto& [ym, acc] : by_month)
        report.months.push_back({ym.first, ym.second, acc.block()});
    return report;
}

ComparisonTable compare(const EvaluationReport& candidate,
                        const EvaluationReport& baseline) {
    if (candidate.split_hash != baseline.split_hash)
        throw ContractError(
            "compare: reports come from different test splits");
    if (candidate.mode != baseline.mode)
        throw ContractError("compare: reports come from different modes");
    ComparisonTable t;
    t.candidate_tag = candidate.model_tag;
    t.baseline_tag = baseline.model_tag;
    t.mode = candidate.mode;
    auto row = [&](const std::string& name, double a, double b) {
        t.rows.push_back({name, a, b, a - b, a < b});
    };
    const auto& ca = candidate.overall;
    const auto& ba = baseline.overall;
    row("all.rmse", ca.all.rmse, ba.all.rmse);
    row("all.mae", ca.all.mae, ba.all.mae);
    row("all.mape", ca.all.mape, ba.all.mape);
    row("extremum.rmse", ca.extremum.rmse, ba.extremum.rmse);
    row("extremum.mae", ca.extremum.mae, ba.extremum.mae);
    row("extremum.mape", ca.extremum.mape, ba.extremum.mape);
    row("noncoverage68", ca.noncoverage68, ba.noncoverage68);
    row("noncoverage95", ca.noncoverage95, ba.noncoverage95);
    return t;
}

namespace {

nlohmann::json block_to_json(const MetricBlock& b) {
    return {
        {"all",
         {{"rmse", b.all.rmse},
          {"mae", b.all.mae},
          {"mape", b.all.mape},
          {"count", b.all.count},
          {"mape_excluded", b.all.mape_excluded}}},
        {"extremum",
         {{"rmse", b.extremum.rmse},
          {"mae", b.extremum.mae},
          {"mape", b.extremum.mape},
          {"count", b.extremum.count},
          {"mape_excluded", b.extremum.mape_excluded}}},
        {"noncoverage68", b.noncoverage68},
        {"noncoverage95", b.noncoverage95},
    };
}

}  // namespace

std::string report_to_json(const EvaluationReport& r) {
    nlohmann::json j;
    j["schema"] = "thermocast-evaluation-report/1";
    j["model_tag"] = r.model_tag;
    j["mode"] = eval_mode_name(r.mode);
    j["split_hash"] = r.split_hash;
    j["mc_samples"] = r.mc_samples;
    j["interval_mode"] = interval_mode_name(r.interval_mode);
    j["mc_seed"] = r.mc_seed;
    j["overall"] = block_to_json(r.overall);
    nlohmann::json months = nlohmann::json::array();
    for (const auto& m : r.months) {
        nlohmann::json e = block_to_json(m.block);
        e["year"] = m.year;
        e["month"] = m.month;
        months.push_back(e);
    }
    j["months"] = months;
    return j.dump(2) + "\n";
}

void write_report_files(const EvaluationReport& r, const std::string& dir,
                        const std::string& prefix) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    {
        std::ofstream out(base / (prefix + "_report.json"), std::ios::binary);
        if (!out) throw FormatError("cannot write report json in " + dir);
        out << report_to_json(r);
    }
    {
        std::ofstream out(base / (prefix + "_monthly_errors.csv"),
                          std::ios::binary);
        if (!out) throw FormatError("cannot write monthly errors in " + dir);
        out << "month,scope,rmse,mae,mape\n";
        char buf[160];
        auto line = [&](const std::string& month, const char* scope,
                        const ErrorStats& e) {
            std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f,%.6f\n",
                          month.c_str(), scope, e.rmse, e.mae, e.mape);
            out << buf;
        };
        line("overall", "all", r.overall.all);
        line("overall", "extremum", r.overall.extremum);
        for (const auto& m : r.months) {
            std::snprintf(buf, sizeof(buf), "%04d-%02d", m.year, m.month);
            const std::string month(buf);
            line(month, "all", m.block.all);
            line(month, "extremum", m.block.extremum);
        }
    }
    {
        std::ofstream out(base / (prefix + "_monthly_coverage.csv"),
                          std::ios::binary);
        if (!out) throw FormatError("cannot write coverage table in " + dir);
        out << "month,level,noncoverage\n";
        char buf[96];
        auto line = [&](const std::string& month, int level, double v) {
            std::snprintf(buf, sizeof(buf), "%s,%d,%.6f\n", month.c_str(),
                          level, v);
            out << buf;
        };
        line("overall", 68, r.overall.noncoverage68);
        line("overall", 95, r.overall.noncoverage95);
        for (const auto& m : r.months) {
            std::snprintf(buf, sizeof(buf), "%04d-%02d", m.year, m.month);
            const std::string month(buf);
            line(month, 68, m.block.noncoverage68);
            line(month, 95, m.block.noncoverage95);
        }
    }
}

std::string comparison_to_text(const ComparisonTable& t) {
    std::ostringstream os;
    os << "mode: " << eval_mode_name(t.mode) << "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-16s %14s %14s %12s %s\n", "metric",
                  t.candidate_tag.c_str(), t.baseline_tag.c_str(), "delta",
                  "improved");
    os << buf;
    for (const auto& r : t.rows) {
        std::snprintf(buf, sizeof(buf), "%-16s %14.6f %14.6f %+12.6f %s\n",
                      r.metric.c_str(), r.candidate, r.baseline, r.delta,
                      r.improved ? "yes" : "no");
        os << buf;
    }
    return os.str();
}

std::string comparison_to_json(const ComparisonTable& t) {
    nlohmann::json j;
    j["schema"] = "thermocast-comparison/1";
    j["candidate"] = t.candidate_tag;
    j["baseline"] = t.baseline_tag;
    j["mode"] = eval_mode_name(t.mode);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"metric", r.metric},
                        {"candidate", r.candidate},
                        {"baseline", r.baseline},
                        {"delta", r.delta},
                        {"improved", r.improved}});
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

}  // namespace thermocast
