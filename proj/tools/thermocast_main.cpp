// thermocast command-line interface: synthesize data, train, evaluate,
// and forecast. Every command is reproducible from (flags, seed, input
// files); all outputs are byte-stable across reruns.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "thermocast/checkpoint.hpp"
#include "thermocast/errors.hpp"
#include "thermocast/metrics.hpp"
#include "thermocast/model.hpp"
#include "thermocast/series.hpp"
#include "thermocast/timeutil.hpp"
#include "thermocast/uncertainty.hpp"
#include "thermocast/windowing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace thermocast;

namespace {

constexpr int kExitIo = 2;
constexpr int kExitData = 3;
constexpr int kExitCompare = 4;
constexpr int kExitHistory = 5;

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("config '" + path + "' is not valid JSON: " +
                          e.what());
    }
}

// flags > config file > defaults
template <typename T>
void merge(const CLI::App& app, const std::string& flag, const json& cfg,
           const char* section, const char* key, T& value) {
    if (app.count(flag) > 0) return;  // flag wins
    if (cfg.contains(section) && cfg[section].contains(key))
        value = cfg[section][key].get<T>();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw FormatError("write failure on '" + path.string() + "'");
}

void require_out_dir(const std::string& out) {
    if (!fs::is_directory(out))
        throw FormatError("output directory '" + out +
                          "' does not exist or is not a directory");
}

json training_config_json(const TrainingConfig& t) {
    return {{"epochs_main", t.epochs_main},
            {"epochs_ancillary", t.epochs_ancillary},
            {"epochs_combiner", t.epochs_combiner},
            {"batch_size", t.batch_size},
            {"learning_rate", t.learning_rate},
            {"seed", t.seed},
            {"patience", t.patience}};
}

json stage_json(const StageReport& s) {
    return {{"train_rmse", s.train_rmse},
            {"validation_rmse", s.validation_rmse},
            {"best_epoch", s.best_epoch},
            {"early_stopped", s.early_stopped}};
}

// ---- synth ----

struct SynthArgs {
    SynthConfig cfg;
    std::string out;
    std::string holidays_file;
    std::string start_date = "2021-01-04";
    std::string config_file;
};

int run_synth(const CLI::App& app, SynthArgs& a) {
    const json cfg = load_config_file(a.config_file);
    merge(app, "--days", cfg, "synth", "days", a.cfg.days);
    merge(app, "--seed", cfg, "synth", "seed", a.cfg.seed);
    merge(app, "--start-date", cfg, "synth", "start_date", a.start_date);
    merge(app, "--noise", cfg, "synth", "noise_sigma", a.cfg.noise_sigma);
    merge(app, "--daily-amp", cfg, "synth", "daily_amplitude",
          a.cfg.daily_amplitude);
    merge(app, "--weekend-offset", cfg, "synth", "weekend_offset",
          a.cfg.weekend_offset);
    merge(app, "--major-offset", cfg, "synth", "major_holiday_offset",
          a.cfg.major_holiday_offset);
    merge(app, "--minor-offset", cfg, "synth", "minor_holiday_offset",
          a.cfg.minor_holiday_offset);
    merge(app, "--coupling", cfg, "synth", "weather_coupling",
          a.cfg.weather_coupling);
    merge(app, "--base", cfg, "synth", "base_indoor", a.cfg.base_indoor);
    merge(app, "--holidays", cfg, "synth", "holidays_file", a.holidays_file);

    a.cfg.start_date = parse_date(a.start_date);
    if (!a.holidays_file.empty())
        a.cfg.holidays = load_holidays(a.holidays_file);

    require_out_dir(a.out);
    const RawSeries series = generate_synthetic(a.cfg);
    export_csv(series, (fs::path(a.out) / "data.csv").string());

    json echo;
    echo["command"] = "synth";
    echo["synth"] = {{"days", a.cfg.days},
                     {"seed", a.cfg.seed},
                     {"start_date", format_date(a.cfg.start_date)},
                     {"noise_sigma", a.cfg.noise_sigma},
                     {"daily_amplitude", a.cfg.daily_amplitude},
                     {"weekend_offset", a.cfg.weekend_offset},
                     {"major_holiday_offset", a.cfg.major_holiday_offset},
                     {"minor_holiday_offset", a.cfg.minor_holiday_offset},
                     {"weather_coupling", a.cfg.weather_coupling},
                     {"base_indoor", a.cfg.base_indoor},
                     {"holidays_file", a.holidays_file},
                     {"rows", series.size()}};
    write_text(fs::path(a.out) / "synth_config.json", echo.dump(2) + "\n");
    std::cout << "wrote " << series.size() << " rows to " << a.out
              << "/data.csv\n";
    return 0;
}

// ---- train ----

struct TrainArgs {
    std::string data;
    std::string out;
    std::string config_file;
    std::string arch = "lstm_dnn";
    ModelConfig model;
    TrainingConfig train;
    SplitSpec split;
    bool no_ancillary = false;
};

ModelConfig merged_model_config(const CLI::App& app, const json& cfg,
                                TrainArgs& a) {
    ModelConfig m = a.model;
    merge(app, "--lookback", cfg, "model", "lookback", m.lookback);
    merge(app, "--horizon", cfg, "model", "horizon", m.horizon);
    merge(app, "--lstm-hidden", cfg, "model", "lstm_hidden", m.lstm_hidden);
    merge(app, "--lstm-layers", cfg, "model", "lstm_layers", m.lstm_layers);
    merge(app, "--dropout", cfg, "model", "dropout_rate", m.dropout_rate);
    merge(app, "--anc-lstm-hidden", cfg, "model", "anc_lstm_hidden",
          m.anc_lstm_hidden);
    if (cfg.contains("model")) {
        const auto& mc = cfg["model"];
        if (mc.contains("main_ffn_hidden"))
            m.main_ffn_hidden = mc["main_ffn_hidden"].get<std::vector<int>>();
        if (mc.contains("anc_ffn_hidden"))
            m.anc_ffn_hidden = mc["anc_ffn_hidden"].get<std::vector<int>>();
        if (mc.contains("per_step_weights"))
            m.per_step_weights = mc["per_step_weights"].get<bool>();
        if (mc.contains("joint_finetune"))
            m.joint_finetune = mc["joint_finetune"].get<bool>();
        if (mc.contains("use_ancillary"))
            m.use_ancillary = mc["use_ancillary"].get<bool>();
    }
    std::string arch = a.arch;
    if (app.count("--arch") == 0 && cfg.contains("model") &&
        cfg["model"].contains("arch"))
        arch = cfg["model"]["arch"].get<std::string>();
    if (arch == "lstm_rnn")
        m.main_ffn_hidden.clear();
    else if (arch != "lstm_dnn")
        throw DomainError("unknown --arch '" + arch + "'");
    if (a.no_ancillary) m.use_ancillary = false;
    if (app.count("--per-step-weights") > 0) m.per_step_weights = true;
    if (app.count("--joint-finetune") > 0) m.joint_finetune = true;
    return m;
}

int run_train(const CLI::App& app, TrainArgs& a) {
    const json cfg = load_config_file(a.config_file);
    merge(app, "--epochs-main", cfg, "train", "epochs_main",
          a.train.epochs_main);
    merge(app, "--epochs-ancillary", cfg, "train", "epochs_ancillary",
          a.train.epochs_ancillary);
    merge(app, "--epochs-combiner", cfg, "train", "epochs_combiner",
          a.train.epochs_combiner);
    merge(app, "--batch", cfg, "train", "batch_size", a.train.batch_size);
    merge(app, "--lr", cfg, "train", "learning_rate", a.train.learning_rate);
    merge(app, "--seed", cfg, "train", "seed", a.train.seed);
    merge(app, "--patience", cfg, "train", "patience", a.train.patience);
    merge(app, "--train-ratio", cfg, "split", "train_ratio",
          a.split.train_ratio);
    merge(app, "--val-fraction", cfg, "split", "validation_fraction",
          a.split.validation_fraction);
    ModelConfig model_cfg = merged_model_config(app, cfg, a);

    require_out_dir(a.out);
    RawSeries series;
    try {
        series = ingest_csv(a.data);
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }

    const WindowedDataset ds =
        WindowedDataset::build(series, model_cfg.lookback, model_cfg.horizon);
    const SplitResult sp = split(ds, a.split);

    AdjointModel model = AdjointModel::init(model_cfg, a.train.seed);
    const TrainingReport report =
        model.train(ds, sp.train, sp.validation, a.train);

    json echo;
    echo["command"] = "train";
    echo["data"] = a.data;
    echo["model"] = json::parse(model_config_to_json(model_cfg));
    echo["train"] = training_config_json(a.train);
    echo["split"] = {{"train_ratio", a.split.train_ratio},
                     {"validation_fraction", a.split.validation_fraction}};
    const std::string echo_text = echo.dump(2) + "\n";
    write_text(fs::path(a.out) / "train_config.json", echo_text);

    save_checkpoint(model, a.train.seed, echo_text,
                    (fs::path(a.out) / "checkpoint.bin").string());

    json rep;
    rep["schema"] = "thermocast-training-report/1";
    rep["model_tag"] = model.tag();
    rep["parameter_count"] = report.parameter_count;
    rep["stages"] = {{"main", stage_json(report.main)},
                     {"ancillary", stage_json(report.ancillary)},
                     {"combiner", stage_json(report.combiner)}};
    if (report.joint) rep["stages"]["joint"] = stage_json(*report.joint);
    rep["split_counts"] = {
        {"train_timestamps", sp.counts.train_timestamps},
        {"validation_timestamps", sp.counts.validation_timestamps},
        {"test_timestamps", sp.counts.test_timestamps},
        {"train_windows", sp.train.size()},
        {"validation_windows", sp.validation.size()},
        {"test_windows", sp.test.size()}};
    write_text(fs::path(a.out) / "train_report.json", rep.dump(2) + "\n");

    std::cout << "model " << model.tag() << ": " << report.parameter_count
              << " trainable parameters\n";
    auto stage_line = [](const char* name, const StageReport& s) {
        if (s.train_rmse.empty()) {
            std::printf("  %-10s skipped\n", name);
            return;
        }
        std::printf("  %-10s %3zu epochs, best epoch %d, val RMSE %.4f%s\n",
                    name, s.train_rmse.size(), s.best_epoch,
                    s.validation_rmse.empty()
                        ? 0.0
                        : s.validation_rmse[std::max(0, s.best_epoch - 1)],
                    s.early_stopped ? " (early stop)" : "");
    };
    stage_line("main", report.main);
    stage_line("ancillary", report.ancillary);
    stage_line("combiner", report.combiner);
    std::printf("  wall clock %.1fs\n", report.wall_clock_seconds);
    std::cout << "checkpoint written to " << a.out << "/checkpoint.bin\n";
    return 0;
}

// ---- evaluate ----

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string out;
    std::string config_file;
    std::string mode = "both";
    std::string interval = "predictive";
    std::string compare_checkpoint;
    CiConfig ci;
    SplitSpec split;
};

int run_evaluate(const CLI::App& app, EvalArgs& a) {
    const json cfg = load_config_file(a.config_file);
    merge(app, "--mc-samples", cfg, "eval", "mc_samples", a.ci.mc_samples);
    merge(app, "--seed", cfg, "eval", "seed", a.ci.seed);
    merge(app, "--interval", cfg, "eval", "interval_mode", a.interval);
    merge(app, "--mode", cfg, "eval", "mode", a.mode);
    merge(app, "--train-ratio", cfg, "split", "train_ratio",
          a.split.train_ratio);
    merge(app, "--val-fraction", cfg, "split", "validation_fraction",
          a.split.validation_fraction);
    a.ci.mode = interval_mode_from_name(a.interval);

    require_out_dir(a.out);
    Checkpoint ck = load_checkpoint(a.checkpoint);

    RawSeries series;
    try {
        series = ingest_csv(a.data);
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    const WindowedDataset ds = WindowedDataset::build(
        series, ck.model.config().lookback, ck.model.config().horizon);
    const SplitResult sp = split(ds, a.split);

    std::optional<Checkpoint> other;
    if (!a.compare_checkpoint.empty())
        other = load_checkpoint(a.compare_checkpoint);

    std::vector<EvalMode> modes;
    if (a.mode == "both")
        modes = {EvalMode::one_step, EvalMode::multi_step};
    else
        modes = {eval_mode_from_name(a.mode)};

    json echo;
    echo["command"] = "evaluate";
    echo["checkpoint"] = a.checkpoint;
    echo["data"] = a.data;
    echo["mode"] = a.mode;
    echo["eval"] = {{"mc_samples", a.ci.mc_samples},
                    {"seed", a.ci.seed},
                    {"interval_mode", interval_mode_name(a.ci.mode)}};
    echo["split"] = {{"train_ratio", a.split.train_ratio},
                     {"validation_fraction", a.split.validation_fraction}};
    if (other) echo["compare_checkpoint"] = a.compare_checkpoint;
    write_text(fs::path(a.out) / "eval_config.json", echo.dump(2) + "\n");

    for (const EvalMode mode : modes) {
        const EvaluationReport rep =
            evaluate(ck.model, ds, sp.test, mode, a.ci);
        write_report_files(rep, a.out, eval_mode_name(mode));
        std::printf(
            "%s %s: RMSE %.4f MAE %.4f MAPE %.4f | max/min RMSE %.4f | "
            "out-of-CI 68%%: %.2f%% 95%%: %.2f%%\n",
            rep.model_tag.c_str(), eval_mode_name(mode), rep.overall.all.rmse,
            rep.overall.all.mae, rep.overall.all.mape,
            rep.overall.extremum.rmse, 100.0 * rep.overall.noncoverage68,
            100.0 * rep.overall.noncoverage95);
        if (other) {
            const EvaluationReport base =
                evaluate(other->model, ds, sp.test, mode, a.ci);
            write_report_files(
                base, a.out,
                std::string(eval_mode_name(mode)) + "_baseline");
            ComparisonTable table;
            try {
                table = compare(rep, base);
            } catch (const ContractError& e) {
                std::cerr << "compare error: " << e.what() << "\n";
                return kExitCompare;
            }
            const std::string text = comparison_to_text(table);
            write_text(fs::path(a.out) / (std::string(eval_mode_name(mode)) +
                                          "_comparison.txt"),
                       text);
            write_text(fs::path(a.out) / (std::string(eval_mode_name(mode)) +
                                          "_comparison.json"),
                       comparison_to_json(table));
            std::cout << text;
        }
    }
    return 0;
}

// ---- forecast ----

struct ForecastArgs {
    std::string checkpoint;
    std::string data;
    std::string out;
    std::string config_file;
    std::string interval = "predictive";
    int mc_samples = 1000;
    std::uint64_t seed = 0;
};

int run_forecast(const CLI::App& app, ForecastArgs& a) {
    const json cfg = load_config_file(a.config_file);
    merge(app, "--mc-samples", cfg, "forecast", "mc_samples", a.mc_samples);
    merge(app, "--seed", cfg, "forecast", "seed", a.seed);
    merge(app, "--interval", cfg, "forecast", "interval_mode", a.interval);
    const IntervalMode imode = interval_mode_from_name(a.interval);

    require_out_dir(a.out);
    Checkpoint ck = load_checkpoint(a.checkpoint);
    const int L = ck.model.config().lookback;
    const int H = ck.model.config().horizon;

    RawSeries series;
    try {
        series = ingest_csv(a.data);
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    }
    if (static_cast<int>(series.size()) < L) {
        std::cerr << "insufficient history: need at least " << L
                  << " rows, got " << series.size() << "\n";
        return kExitHistory;
    }

    // last L rows form the input window
    const auto n = series.size();
    const auto features = build_main_features(series);
    const auto ancillary = build_ancillary_features(series);
    std::vector<double> window(
        features.end() - static_cast<std::ptrdiff_t>(L) * kMainFeatureCount,
        features.end());
    std::vector<double> anc(
        ancillary.end() -
            static_cast<std::ptrdiff_t>(L) * kAncillaryFeatureCount,
        ancillary.end());

    const auto point = ck.model.predict(window, anc);
    const SampleSet samples =
        mc_sample(ck.model, window, anc, a.mc_samples, a.seed);
    const ForecastWithCI f = derive_ci(samples, imode, point);

    const std::int64_t last_epoch = series.epochs.back();
    std::ofstream out(fs::path(a.out) / "forecast.csv", std::ios::binary);
    if (!out) throw FormatError("cannot write forecast.csv in " + a.out);
    out << "timestamp,step,point,mean,std,lo68,hi68,lo95,hi95\n";
    char buf[256];
    for (int s = 0; s < H; ++s) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                      format_timestamp(last_epoch + (s + 1) * kStepSeconds)
                          .c_str(),
                      s, f.point[s], f.mean[s], f.stddev[s], f.lo68[s],
                      f.hi68[s], f.lo95[s], f.hi95[s]);
        out << buf;
    }
    if (!out) throw FormatError("write failure on forecast.csv");

    json echo;
    echo["command"] = "forecast";
    echo["checkpoint"] = a.checkpoint;
    echo["data"] = a.data;
    echo["forecast"] = {{"mc_samples", a.mc_samples},
                        {"seed", a.seed},
                        {"interval_mode", interval_mode_name(imode)},
                        {"degenerate_steps", f.degenerate}};
    write_text(fs::path(a.out) / "forecast_config.json", echo.dump(2) + "\n");
    std::cout << "wrote " << H << "-step forecast to " << a.out
              << "/forecast.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermocast: multi-horizon indoor temperature forecasting"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand(
        "synth", "generate a synthetic building-climate CSV");
    synth->add_option("--days", synth_args.cfg.days, "days to generate");
    synth->add_option("--seed", synth_args.cfg.seed, "generator seed");
    synth->add_option("--out", synth_args.out, "output directory")
        ->required();
    synth->add_option("--start-date", synth_args.start_date, "YYYY-MM-DD");
    synth->add_option("--holidays", synth_args.holidays_file,
                      "holiday list file (YYYY-MM-DD,major|minor per line)");
    synth->add_option("--noise", synth_args.cfg.noise_sigma);
    synth->add_option("--daily-amp", synth_args.cfg.daily_amplitude);
    synth->add_option("--weekend-offset", synth_args.cfg.weekend_offset);
    synth->add_option("--major-offset", synth_args.cfg.major_holiday_offset);
    synth->add_option("--minor-offset", synth_args.cfg.minor_holiday_offset);
    synth->add_option("--coupling", synth_args.cfg.weather_coupling);
    synth->add_option("--base", synth_args.cfg.base_indoor);
    synth->add_option("--config", synth_args.config_file, "JSON config file");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a forecasting model");
    train->add_option("--data", train_args.data, "input CSV")->required();
    train->add_option("--out", train_args.out, "output directory")
        ->required();
    train->add_option("--config", train_args.config_file, "JSON config file");
    train->add_option("--seed", train_args.train.seed);
    train->add_option("--arch", train_args.arch, "lstm_dnn or lstm_rnn");
    train->add_flag("--no-ancillary", train_args.no_ancillary,
                    "train the main network only (plain baseline)");
    train->add_option("--lookback", train_args.model.lookback);
    train->add_option("--horizon", train_args.model.horizon);
    train->add_option("--lstm-hidden", train_args.model.lstm_hidden);
    train->add_option("--lstm-layers", train_args.model.lstm_layers);
    train->add_option("--anc-lstm-hidden", train_args.model.anc_lstm_hidden,
                      "enable an LSTM front-end in the ancillary network");
    train->add_option("--dropout", train_args.model.dropout_rate);
    train->add_flag("--per-step-weights",
                    "combiner weights per horizon step instead of scalars");
    train->add_flag("--joint-finetune",
                    "experimental joint fine-tune after the staged training");
    train->add_option("--epochs-main", train_args.train.epochs_main);
    train->add_option("--epochs-ancillary", train_args.train.epochs_ancillary);
    train->add_option("--epochs-combiner", train_args.train.epochs_combiner);
    train->add_option("--batch", train_args.train.batch_size);
    train->add_option("--lr", train_args.train.learning_rate);
    train->add_option("--patience", train_args.train.patience);
    train->add_option("--train-ratio", train_args.split.train_ratio);
    train->add_option("--val-fraction", train_args.split.validation_fraction);

    EvalArgs eval_args;
    auto* evaluate_cmd = app.add_subcommand(
        "evaluate", "score a checkpoint on the test split");
    evaluate_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();
    evaluate_cmd->add_option("--data", eval_args.data)->required();
    evaluate_cmd->add_option("--out", eval_args.out)->required();
    evaluate_cmd->add_option("--config", eval_args.config_file);
    evaluate_cmd->add_option("--mode", eval_args.mode,
                             "one_step, multi_step, or both");
    evaluate_cmd->add_option("--mc-samples", eval_args.ci.mc_samples);
    evaluate_cmd->add_option("--seed", eval_args.ci.seed);
    evaluate_cmd->add_option("--interval", eval_args.interval,
                             "predictive or mean_ci");
    evaluate_cmd->add_option("--compare", eval_args.compare_checkpoint,
                             "second checkpoint for a side-by-side table");
    evaluate_cmd->add_option("--train-ratio", eval_args.split.train_ratio);
    evaluate_cmd->add_option("--val-fraction",
                             eval_args.split.validation_fraction);

    ForecastArgs fc_args;
    auto* forecast = app.add_subcommand(
        "forecast", "96-step forecast with confidence bands");
    forecast->add_option("--checkpoint", fc_args.checkpoint)->required();
    forecast->add_option("--data", fc_args.data)->required();
    forecast->add_option("--out", fc_args.out)->required();
    forecast->add_option("--config", fc_args.config_file);
    forecast->add_option("--mc-samples", fc_args.mc_samples);
    forecast->add_option("--seed", fc_args.seed);
    forecast->add_option("--interval", fc_args.interval);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(*synth, synth_args);
        if (train->parsed()) return run_train(*train, train_args);
        if (evaluate_cmd->parsed()) return run_evaluate(*evaluate_cmd, eval_args);
        if (forecast->parsed()) return run_forecast(*forecast, fc_args);
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCompare;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
