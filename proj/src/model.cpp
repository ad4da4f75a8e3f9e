#include "thermocast/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "thermocast/errors.hpp"

namespace thermocast {

void FeatureScaler::fit(std::span<const double> rows, int width,
                        std::int64_t n_rows) {
    mean.assign(width, 0.0);
    stddev.assign(width, 1.0);
    if (n_rows <= 0) throw DomainError("scaler fit needs at least one row");
    for (std::int64_t i = 0; i < n_rows; ++i)
        for (int f = 0; f < width; ++f) mean[f] += rows[i * width + f];
    for (int f = 0; f < width; ++f) mean[f] /= static_cast<double>(n_rows);
    std::vector<double> sq(width, 0.0);
    for (std::int64_t i = 0; i < n_rows; ++i)
        for (int f = 0; f < width; ++f) {
            const double d = rows[i * width + f] - mean[f];
            sq[f] += d * d;
        }
    for (int f = 0; f < width; ++f) {
        const double var = sq[f] / static_cast<double>(n_rows);
        stddev[f] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
}

void TargetScaler::fit(std::span<const double> values) {
    if (values.empty()) throw DomainError("scaler fit needs values");
    double s = 0.0;
    for (double v : values) s += v;
    mean = s / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    const double var = sq / static_cast<double>(values.size());
    stddev = var > 1e-24 ? std::sqrt(var) : 1.0;
}

namespace {

std::vector<int> ffn_widths(const std::vector<int>& hidden, int out) {
    std::vector<int> w = hidden;
    w.push_back(out);
    return w;
}

std::vector<DenseLayer> init_ffn(int in, const std::vector<int>& hidden,
                                 int out, Rng& rng, const std::string& name) {
    std::vector<DenseLayer> net;
    const auto widths = ffn_widths(hidden, out);
    int prev = in;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        const bool last = i + 1 == widths.size();
        net.push_back(DenseLayer::init(
            prev, widths[i],
            last ? DenseLayer::Activation::identity
                 : DenseLayer::Activation::relu,
            rng, name + ".fc" + std::to_string(i)));
        prev = widths[i];
    }
    return net;
}

std::vector<LstmLayer> init_lstm_stack(int in, int hidden, int layers,
                                       Rng& rng, const std::string& name) {
    std::vector<LstmLayer> stack;
    int prev = in;
    for (int l = 0; l < layers; ++l) {
        stack.push_back(
            LstmLayer::init(prev, hidden, rng, name + ".lstm" +
                                                   std::to_string(l)));
        prev = hidden;
    }
    return stack;
}

}  // namespace

AdjointModel AdjointModel::init(const ModelConfig& cfg, std::uint64_t seed) {
    if (cfg.lookback < 1 || cfg.horizon < 1 || cfg.lstm_hidden < 1 ||
        cfg.lstm_layers < 1 || cfg.main_features < 1)
        throw DomainError("model config extents must be positive");
    if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
        throw DomainError("dropout_rate must be in [0, 1)");
    AdjointModel m;
    m.cfg_ = cfg;

    // Component-labeled streams: the main network's initialization does not
    // depend on whether an ancillary network exists, which keeps
    // adjoint/main-only runs with the same seed exactly paired.
    Rng main_rng(seed, "init/main");
    m.main_lstm_ = init_lstm_stack(cfg.main_features, cfg.lstm_hidden,
                                   cfg.lstm_layers, main_rng, "main");
    const int state_width = 2 * cfg.lstm_hidden * cfg.lstm_layers;
    m.main_ffn_ = init_ffn(state_width, cfg.main_ffn_hidden, cfg.horizon,
                           main_rng, "main");

    if (cfg.use_ancillary) {
        Rng anc_rng(seed, "init/ancillary");
        int anc_in = cfg.lookback * cfg.ancillary_features;
        if (cfg.anc_lstm_hidden > 0) {
            m.anc_lstm_ =
                init_lstm_stack(cfg.ancillary_features, cfg.anc_lstm_hidden,
                                cfg.anc_lstm_layers, anc_rng, "ancillary");
            anc_in = 2 * cfg.anc_lstm_hidden * cfg.anc_lstm_layers;
        }
        m.anc_ffn_ = init_ffn(anc_in, cfg.anc_ffn_hidden, cfg.horizon,
                              anc_rng, "ancillary");
    }
    const Shape wshape =
        cfg.per_step_weights ? Shape{cfg.horizon} : Shape{1};
    m.w1_ = Tensor::param("combiner.w1", wshape,
                          std::vector<double>(shape_size(wshape), 0.5));
    m.w2_ = Tensor::param("combiner.w2", wshape,
                          std::vector<double>(shape_size(wshape), 0.5));
    return m;
}

std::string AdjointModel::tag() const {
    std::string base = cfg_.main_ffn_hidden.empty() ? "lstm-rnn" : "lstm-dnn";
    return cfg_.use_ancillary ? base + "-adjoint" : base;
}

std::vector<Tensor> AdjointModel::main_params() const {
    std::vector<Tensor> p;
    for (const auto& l : main_lstm_) l.collect_params(p);
    for (const auto& l : main_ffn_) l.collect_params(p);
    return p;
}

std::vector<Tensor> AdjointModel::ancillary_params() const {
    std::vector<Tensor> p;
    for (const auto& l : anc_lstm_) l.collect_params(p);
    for (const auto& l : anc_ffn_) l.collect_params(p);
    return p;
}

std::vector<Tensor> AdjointModel::combiner_params() const {
    if (!cfg_.use_ancillary) return {};
    return {w1_, w2_};
}

std::vector<Tensor> AdjointModel::all_params() const {
    auto p = main_params();
    auto a = ancillary_params();
    p.insert(p.end(), a.begin(), a.end());
    auto c = combiner_params();
    p.insert(p.end(), c.begin(), c.end());
    return p;
}

void AdjointModel::set_scalers(FeatureScaler f, TargetScaler t) {
    fscaler_ = std::move(f);
    tscaler_ = t;
}

// ---- batched forward paths ----

namespace {

// Tile/gather helpers produce the [B x m] per-timestep inputs. `starts`
// holds the first source row of each batch element.
std::vector<Tensor> gather_xseq(const WindowedDataset& ds,
                                std::span<const std::int64_t> starts,
                                const FeatureScaler& scaler, int lookback) {
    const int m = ds.n_features();
    const auto batch = static_cast<std::int64_t>(starts.size());
    std::vector<Tensor> xseq;
    xseq.reserve(lookback);
    for (int t = 0; t < lookback; ++t) {
        std::vector<double> data(static_cast<std::size_t>(batch) * m);
        for (std::int64_t b = 0; b < batch; ++b) {
            const auto row = ds.feature_row(starts[b] + t);
            for (int f = 0; f < m; ++f)
                data[b * m + f] = scaler.apply(row[f], f);
        }
        xseq.push_back(Tensor::from_data({batch, m}, std::move(data)));
    }
    return xseq;
}

Tensor gather_anc_flat(const WindowedDataset& ds,
                       std::span<const std::int64_t> starts, int lookback) {
    const int k = ds.n_ancillary();
    const auto batch = static_cast<std::int64_t>(starts.size());
    const std::int64_t width = static_cast<std::int64_t>(lookback) * k;
    std::vector<double> data(static_cast<std::size_t>(batch) * width);
    for (std::int64_t b = 0; b < batch; ++b) {
        for (int t = 0; t < lookback; ++t) {
            const auto row = ds.ancillary_row(starts[b] + t);
            std::copy(row.begin(), row.end(),
                      data.begin() + b * width + static_cast<std::int64_t>(t) * k);
        }
    }
    return Tensor::from_data({batch, width}, std::move(data));
}

std::vector<Tensor> gather_anc_seq(const WindowedDataset& ds,
                                   std::span<const std::int64_t> starts,
                                   int lookback) {
    const int k = ds.n_ancillary();
    const auto batch = static_cast<std::int64_t>(starts.size());
    std::vector<Tensor> seq;
    seq.reserve(lookback);
    for (int t = 0; t < lookback; ++t) {
        std::vector<double> data(static_cast<std::size_t>(batch) * k);
        for (std::int64_t b = 0; b < batch; ++b) {
            const auto row = ds.ancillary_row(starts[b] + t);
            std::copy(row.begin(), row.end(), data.begin() + b * k);
        }
        seq.push_back(Tensor::from_data({batch, k}, std::move(data)));
    }
    return seq;
}

Tensor gather_targets(const WindowedDataset& ds,
                      std::span<const std::int64_t> starts, int lookback,
                      int horizon) {
    const auto batch = static_cast<std::int64_t>(starts.size());
    std::vector<double> data(static_cast<std::size_t>(batch) * horizon);
    for (std::int64_t b = 0; b < batch; ++b)
        for (int s = 0; s < horizon; ++s)
            data[b * horizon + s] = ds.target(starts[b] + lookback + s);
    return Tensor::from_data({batch, horizon}, std::move(data));
}

// Single raw window -> per-timestep [rows x m] tensors (each batch row is
// the same window; rows > 1 tiles it for Monte-Carlo sampling).
std::vector<Tensor> tile_window(std::span<const double> window, int lookback,
                                int m, const FeatureScaler& scaler,
                                std::int64_t rows) {
    std::vector<Tensor> xseq;
    xseq.reserve(lookback);
    for (int t = 0; t < lookback; ++t) {
        std::vector<double> scaled(m);
        for (int f = 0; f < m; ++f)
            scaled[f] = scaler.apply(window[static_cast<std::size_t>(t) * m + f], f);
        std::vector<double> data(static_cast<std::size_t>(rows) * m);
        for (std::int64_t r = 0; r < rows; ++r)
            std::copy(scaled.begin(), scaled.end(), data.begin() + r * m);
        xseq.push_back(Tensor::from_data({rows, m}, std::move(data)));
    }
    return xseq;
}

Tensor tile_anc_flat(std::span<const double> anc, std::int64_t rows) {
    const auto width = static_cast<std::int64_t>(anc.size());
    std::vector<double> data(static_cast<std::size_t>(rows) * width);
    for (std::int64_t r = 0; r < rows; ++r)
        std::copy(anc.begin(), anc.end(), data.begin() + r * width);
    return Tensor::from_data({rows, width}, std::move(data));
}

std::vector<Tensor> tile_anc_seq(std::span<const double> anc, int lookback,
                                 int k, std::int64_t rows) {
    std::vector<Tensor> seq;
    seq.reserve(lookback);
    for (int t = 0; t < lookback; ++t) {
        std::vector<double> data(static_cast<std::size_t>(rows) * k);
        for (std::int64_t r = 0; r < rows; ++r)
            std::copy_n(anc.begin() + static_cast<std::int64_t>(t) * k, k,
                        data.begin() + r * k);
        seq.push_back(Tensor::from_data({rows, k}, std::move(data)));
    }
    return seq;
}

}  // namespace

Tensor AdjointModel::forward_main_t(std::span<const Tensor> xseq,
                                    const DropoutCtx& dropout) const {
    Tensor state = lstm_encode(main_lstm_, xseq, dropout);
    state = dropout.apply(state);
    Tensor y = dense_forward(main_ffn_, state, dropout);
    return affine(y, tscaler_.stddev, tscaler_.mean);
}

Tensor AdjointModel::forward_ancillary_t(const Tensor& anc_flat,
                                         std::span<const Tensor> anc_seq,
                                         const DropoutCtx& dropout) const {
    Tensor x;
    if (!anc_lstm_.empty()) {
        Tensor state = lstm_encode(anc_lstm_, anc_seq, dropout);
        x = dropout.apply(state);
    } else {
        x = anc_flat;
    }
    Tensor y = dense_forward(anc_ffn_, x, dropout);
    return affine(y, tscaler_.stddev, tscaler_.mean);
}

Tensor AdjointModel::combine_t(const Tensor& y_main,
                               const Tensor& y_anc) const {
    return relu(add(scale(w1_, y_main), scale(w2_, y_anc)));
}

// ---- single-window public API ----

std::vector<double> AdjointModel::forward_main(
    std::span<const double> window) const {
    const auto expected =
        static_cast<std::size_t>(cfg_.lookback) * cfg_.main_features;
    if (window.size() != expected)
        throw DimensionError("forward_main: window has " +
                             std::to_string(window.size()) +
                             " values, expected " + std::to_string(expected));
    auto xseq = tile_window(window, cfg_.lookback, cfg_.main_features,
                            fscaler_, 1);
    Tensor y = forward_main_t(xseq, DropoutCtx::off());
    return {y.data().begin(), y.data().end()};
}

std::vector<double> AdjointModel::forward_ancillary(
    std::span<const double> anc_window) const {
    if (!cfg_.use_ancillary)
        throw ContractError("model has no ancillary network");
    const auto expected =
        static_cast<std::size_t>(cfg_.lookback) * cfg_.ancillary_features;
    if (anc_window.size() != expected)
        throw DimensionError("forward_ancillary: window has " +
                             std::to_string(anc_window.size()) +
                             " values, expected " + std::to_string(expected));
    for (double v : anc_window)
        if (v != 0.0 && v != 1.0)
            throw ValidationError(
                "ancillary features must be exactly 0 or 1, got " +
                std::to_string(v));
    Tensor flat = tile_anc_flat(anc_window, 1);
    auto seq = anc_lstm_.empty()
                   ? std::vector<Tensor>{}
                   : tile_anc_seq(anc_window, cfg_.lookback,
                                  cfg_.ancillary_features, 1);
    Tensor y = forward_ancillary_t(flat, seq, DropoutCtx::off());
    return {y.data().begin(), y.data().end()};
}

std::vector<double> AdjointModel::combine(std::span<const double> y_main,
                                          std::span<const double> y_anc) const {
    if (y_main.size() != y_anc.size())
        throw DimensionError("combine: length mismatch " +
                             std::to_string(y_main.size()) + " vs " +
                             std::to_string(y_anc.size()));
    const bool per_step = w1_.size() > 1;
    std::vector<double> out(y_main.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto wi = per_step ? static_cast<std::int64_t>(i) : 0;
        const double v = w1_.at(wi) * y_main[i] + w2_.at(wi) * y_anc[i];
        out[i] = v > 0.0 ? v : 0.0;
    }
    return out;
}

std::vector<double> AdjointModel::predict(
    std::span<const double> window, std::span<const double> anc_window) const {
    if (!cfg_.use_ancillary) return forward_main(window);
    return combine(forward_main(window), forward_ancillary(anc_window));
}

std::vector<double> AdjointModel::mc_rows(std::span<const double> window,
                                          std::span<const double> anc_window,
                                          int n, std::uint64_t seed) const {
    if (n < 1) throw DomainError("mc_rows: need n >= 1");
    auto xseq = tile_window(window, cfg_.lookback, cfg_.main_features,
                            fscaler_, n);
    std::vector<Rng> rngs;
    rngs.reserve(n);
    for (int r = 0; r < n; ++r)
        rngs.emplace_back(seed, "mc-sample", static_cast<std::uint64_t>(r));
    const DropoutCtx ctx = DropoutCtx::mc(cfg_.dropout_rate, rngs);
    Tensor ym = forward_main_t(xseq, ctx);
    if (!cfg_.use_ancillary) return {ym.data().begin(), ym.data().end()};
    Tensor flat = tile_anc_flat(anc_window, n);
    auto seq = anc_lstm_.empty()
                   ? std::vector<Tensor>{}
                   : tile_anc_seq(anc_window, cfg_.lookback,
                                  cfg_.ancillary_features, n);
    Tensor ya = forward_ancillary_t(flat, seq, ctx);
    Tensor y = combine_t(ym, ya);
    return {y.data().begin(), y.data().end()};
}

std::vector<double> AdjointModel::predict_batch_f(
    const WindowedDataset& ds, std::span<const std::int64_t> windows,
    bool main_only, bool anc_only) const {
    const int H = cfg_.horizon;
    std::vector<double> out(windows.size() * static_cast<std::size_t>(H));
    constexpr std::int64_t kChunk = 128;
    for (std::size_t off = 0; off < windows.size();
         off += static_cast<std::size_t>(kChunk)) {
        const auto len =
            std::min<std::size_t>(kChunk, windows.size() - off);
        const std::span<const std::int64_t> chunk(windows.data() + off, len);
        Tensor y;
        if (anc_only) {
            Tensor flat = gather_anc_flat(ds, chunk, cfg_.lookback);
            auto seq = anc_lstm_.empty() ? std::vector<Tensor>{}
                                         : gather_anc_seq(ds, chunk,
                                                          cfg_.lookback);
            y = forward_ancillary_t(flat, seq, DropoutCtx::off());
        } else {
            auto xseq = gather_xseq(ds, chunk, fscaler_, cfg_.lookback);
            Tensor ym = forward_main_t(xseq, DropoutCtx::off());
            if (main_only || !cfg_.use_ancillary) {
                y = ym;
            } else {
                Tensor flat = gather_anc_flat(ds, chunk, cfg_.lookback);
                auto seq = anc_lstm_.empty()
                               ? std::vector<Tensor>{}
                               : gather_anc_seq(ds, chunk, cfg_.lookback);
                Tensor ya = forward_ancillary_t(flat, seq, DropoutCtx::off());
                y = combine_t(ym, ya);
            }
        }
        std::copy(y.data().begin(), y.data().end(),
                  out.begin() + static_cast<std::int64_t>(off) * H);
    }
    return out;
}

std::vector<double> AdjointModel::predict_windows(
    const WindowedDataset& ds, std::span<const std::int64_t> windows) const {
    return predict_batch_f(ds, windows, false, false);
}

// ---- training ----

namespace {

struct ParamSnapshot {
    std::vector<std::vector<double>> data;

    static ParamSnapshot capture(const std::vector<Tensor>& params) {
        ParamSnapshot s;
        s.data.reserve(params.size());
        for (const auto& p : params)
            s.data.emplace_back(p.data().begin(), p.data().end());
        return s;
    }
    void restore(std::vector<Tensor>& params) const {
        for (std::size_t i = 0; i < params.size(); ++i)
            std::copy(data[i].begin(), data[i].end(),
                      params[i].mutable_data().begin());
    }
};

double global_rmse(std::span<const double> pred, std::span<const double> truth) {
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(pred.size()));
}

}  // namespace

TrainingReport AdjointModel::train(const WindowedDataset& ds,
                                   std::span<const std::int64_t> train_windows,
                                   std::span<const std::int64_t> val_windows,
                                   const TrainingConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    if (train_windows.empty()) throw DomainError("train split is empty");
    if (cfg.batch_size < 1 || cfg.learning_rate <= 0.0 || cfg.patience < 0)
        throw DomainError("invalid training configuration");

    // Scalers are fitted on the rows the training windows can see.
    std::int64_t fit_rows = 0;
    for (auto w : train_windows)
        fit_rows = std::max(fit_rows, w + cfg_.lookback + cfg_.horizon);
    {
        std::vector<double> rows(static_cast<std::size_t>(fit_rows) *
                                 cfg_.main_features);
        for (std::int64_t i = 0; i < fit_rows; ++i) {
            const auto row = ds.feature_row(i);
            std::copy(row.begin(), row.end(),
                      rows.begin() + i * cfg_.main_features);
        }
        fscaler_.fit(rows, cfg_.main_features, fit_rows);
        tscaler_.fit(ds.targets().subspan(0, static_cast<std::size_t>(fit_rows)));
    }

    TrainingReport report;

    // Truths for validation scoring.
    std::vector<double> val_truth;
    val_truth.reserve(val_windows.size() * cfg_.horizon);
    for (auto w : val_windows) {
        const auto t = ds.target_window(w);
        val_truth.insert(val_truth.end(), t.begin(), t.end());
    }

    // Generic stage loop: shuffled contiguous mini-batches, per-epoch
    // validation, patience-based early stop with best-epoch restore.
    auto run_stage = [&](const char* stage, std::vector<Tensor> params,
                         int epochs, auto&& batch_loss,
                         auto&& validate) -> StageReport {
        StageReport rep;
        if (epochs <= 0 || params.empty()) return rep;
        AdamOptimizer opt(params, {.lr = cfg.learning_rate});
        double best = std::numeric_limits<double>::infinity();
        ParamSnapshot best_params;
        int since_best = 0;
        std::vector<std::int64_t> order(train_windows.begin(),
                                        train_windows.end());
        for (int epoch = 1; epoch <= epochs; ++epoch) {
            Rng shuffle_rng(cfg.seed, std::string(stage) + "/shuffle",
                            static_cast<std::uint64_t>(epoch));
            shuffle_rng.shuffle(order);
            Rng dropout_rng(cfg.seed, std::string(stage) + "/dropout",
                            static_cast<std::uint64_t>(epoch));
            double loss_sum = 0.0;
            int batches = 0;
            for (std::size_t off = 0; off < order.size();
                 off += static_cast<std::size_t>(cfg.batch_size)) {
                const auto len = std::min<std::size_t>(
                    static_cast<std::size_t>(cfg.batch_size),
                    order.size() - off);
                const std::span<const std::int64_t> chunk(order.data() + off,
                                                          len);
                Tape tape;
                TapeScope scope(tape);
                Tensor loss = batch_loss(chunk, dropout_rng);
                const double lv = loss.item();
                if (!std::isfinite(lv))
                    throw TrainingError(
                        std::string("training diverged in stage '") + stage +
                            "' at epoch " + std::to_string(epoch),
                        epoch - 1);
                opt.zero_grad();
                backward(loss);
                opt.step();
                loss_sum += lv;
                ++batches;
            }
            rep.train_rmse.push_back(loss_sum / std::max(batches, 1));
            if (!val_windows.empty()) {
                const double v = validate();
                rep.validation_rmse.push_back(v);
                if (v < best - 1e-12) {
                    best = v;
                    rep.best_epoch = epoch;
                    best_params = ParamSnapshot::capture(params);
                    since_best = 0;
                } else if (++since_best >= cfg.patience && cfg.patience > 0) {
                    rep.early_stopped = true;
                    break;
                }
            } else {
                rep.best_epoch = epoch;
            }
        }
        if (!val_windows.empty() && rep.best_epoch > 0)
            best_params.restore(params);
        return rep;
    };

    // Stage 1: main network alone against the ground-truth horizon.
    report.main = run_stage(
        "stage-main", main_params(), cfg.epochs_main,
        [&](std::span<const std::int64_t> chunk, Rng& drop) {
            auto xseq = gather_xseq(ds, chunk, fscaler_, cfg_.lookback);
            Tensor targets =
                gather_targets(ds, chunk, cfg_.lookback, cfg_.horizon);
            DropoutCtx ctx = DropoutCtx::training(cfg_.dropout_rate, drop);
            return rmse_loss(forward_main_t(xseq, ctx), targets);
        },
        [&] {
            return global_rmse(predict_batch_f(ds, val_windows, true, false),
                               val_truth);
        });

    // Stage 2: ancillary network alone against the same targets.
    if (cfg_.use_ancillary) {
        report.ancillary = run_stage(
            "stage-ancillary", ancillary_params(), cfg.epochs_ancillary,
            [&](std::span<const std::int64_t> chunk, Rng& drop) {
                Tensor flat = gather_anc_flat(ds, chunk, cfg_.lookback);
                auto seq = anc_lstm_.empty()
                               ? std::vector<Tensor>{}
                               : gather_anc_seq(ds, chunk, cfg_.lookback);
                Tensor targets =
                    gather_targets(ds, chunk, cfg_.lookback, cfg_.horizon);
                DropoutCtx ctx = DropoutCtx::training(cfg_.dropout_rate, drop);
                return rmse_loss(forward_ancillary_t(flat, seq, ctx), targets);
            },
            [&] {
                return global_rmse(
                    predict_batch_f(ds, val_windows, false, true), val_truth);
            });

        // Stage 3: subnetworks frozen; only (w1, w2) move. Frozen outputs
        // are cached once so each epoch is a cheap pass over [S x H] blocks.
        if (cfg.epochs_combiner > 0) {
            const int H = cfg_.horizon;
            std::vector<std::int64_t> train_vec(train_windows.begin(),
                                                train_windows.end());
            const auto m_train = predict_batch_f(ds, train_vec, true, false);
            const auto a_train = predict_batch_f(ds, train_vec, false, true);
            const auto m_val = predict_batch_f(ds, val_windows, true, false);
            const auto a_val = predict_batch_f(ds, val_windows, false, true);
            // cached row lookup: window id -> offset in train_vec
            std::vector<std::int64_t> row_of(ds.n_windows(), -1);
            for (std::size_t i = 0; i < train_vec.size(); ++i)
                row_of[train_vec[i]] = static_cast<std::int64_t>(i);

            report.combiner = run_stage(
                "stage-combiner", combiner_params(), cfg.epochs_combiner,
                [&](std::span<const std::int64_t> chunk, Rng&) {
                    const auto B = static_cast<std::int64_t>(chunk.size());
                    std::vector<double> mb(B * H), ab(B * H);
                    for (std::int64_t b = 0; b < B; ++b) {
                        const auto r = row_of[chunk[b]];
                        std::copy_n(m_train.begin() + r * H, H,
                                    mb.begin() + b * H);
                        std::copy_n(a_train.begin() + r * H, H,
                                    ab.begin() + b * H);
                    }
                    Tensor ym = Tensor::from_data({B, H}, std::move(mb));
                    Tensor ya = Tensor::from_data({B, H}, std::move(ab));
                    Tensor targets =
                        gather_targets(ds, chunk, cfg_.lookback, H);
                    return rmse_loss(combine_t(ym, ya), targets);
                },
                [&] {
                    const bool per_step = w1_.size() > 1;
                    double sq = 0.0;
                    for (std::size_t i = 0; i < m_val.size(); ++i) {
                        const auto wi =
                            per_step ? static_cast<std::int64_t>(i % H) : 0;
                        const double v = w1_.at(wi) * m_val[i] +
                                         w2_.at(wi) * a_val[i];
                        const double d =
                            (v > 0.0 ? v : 0.0) - val_truth[i];
                        sq += d * d;
                    }
                    return std::sqrt(sq /
                                     static_cast<double>(m_val.size()));
                });
        }

        // Optional experiment: fine-tune everything jointly on the
        // combined output after the staged procedure.
        if (cfg_.joint_finetune) {
            report.joint = run_stage(
                "stage-joint", all_params(), cfg.epochs_combiner,
                [&](std::span<const std::int64_t> chunk, Rng& drop) {
                    auto xseq =
                        gather_xseq(ds, chunk, fscaler_, cfg_.lookback);
                    Tensor flat = gather_anc_flat(ds, chunk, cfg_.lookback);
                    auto seq = anc_lstm_.empty()
                                   ? std::vector<Tensor>{}
                                   : gather_anc_seq(ds, chunk, cfg_.lookback);
                    Tensor targets = gather_targets(ds, chunk, cfg_.lookback,
                                                    cfg_.horizon);
                    DropoutCtx ctx =
                        DropoutCtx::training(cfg_.dropout_rate, drop);
                    Tensor y = combine_t(forward_main_t(xseq, ctx),
                                         forward_ancillary_t(flat, seq, ctx));
                    return rmse_loss(y, targets);
                },
                [&] {
                    return global_rmse(
                        predict_batch_f(ds, val_windows, false, false),
                        val_truth);
                });
        }
    }

    report.parameter_count = count_parameters(all_params());
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    return report;
}

std::uint64_t params_fingerprint(std::span<const Tensor> params) {
    std::uint64_t h = 1469598103934665603ull;
    auto absorb = [&](const void* p, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& t : params) {
        absorb(t.name().data(), t.name().size());
        absorb(t.data().data(), t.data().size() * sizeof(double));
    }
    return h;
}

}  // namespace thermocast
