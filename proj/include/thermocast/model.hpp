#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermocast/forecaster.hpp"
#include "thermocast/layers.hpp"
#include "thermocast/tensor.hpp"
#include "thermocast/windowing.hpp"

namespace thermocast {

struct ModelConfig {
    int lookback = 96;
    int horizon = 96;
    int main_features = kMainFeatureCount;
    int ancillary_features = kAncillaryFeatureCount;

    // main network: LSTM encoder + feed-forward stack
    int lstm_hidden = 64;
    int lstm_layers = 2;
    // hidden widths; the output layer (width = horizon) is implicit. An
    // empty list degenerates to a single linear readout (the plain
    // LSTM-RNN baseline architecture).
    std::vector<int> main_ffn_hidden = {128, 123, 117, 112, 107, 101};

    // ancillary network: shallow feed-forward over the flattened indicator
    // window; anc_lstm_hidden > 0 switches in an LSTM front-end instead.
    std::vector<int> anc_ffn_hidden = {32, 32, 32};
    int anc_lstm_hidden = 0;
    int anc_lstm_layers = 1;

    bool use_ancillary = true;
    // combiner weights per horizon step instead of scalars
    bool per_step_weights = false;
    // experimental: joint fine-tune of all parts after the combiner stage
    bool joint_finetune = false;

    double dropout_rate = 0.1;
};

// Per-feature z-score transform, fitted on training rows only.
struct FeatureScaler {
    std::vector<double> mean, stddev;

    bool fitted() const { return !mean.empty(); }
    void fit(std::span<const double> rows, int width, std::int64_t n_rows);
    double apply(double v, int feature) const {
        return fitted() ? (v - mean[feature]) / stddev[feature] : v;
    }
};

struct TargetScaler {
    double mean = 0.0;
    double stddev = 1.0;

    void fit(std::span<const double> values);
};

struct TrainingConfig {
    int epochs_main = 40;
    int epochs_ancillary = 40;
    int epochs_combiner = 80;
    int batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;
    int patience = 5;  // early stop after this many epochs without val gain
};

struct StageReport {
    std::vector<double> train_rmse;       // per epoch, deg F
    std::vector<double> validation_rmse;  // per epoch, deg F
    int best_epoch = 0;                   // 1-based; 0 when stage skipped
    bool early_stopped = false;
};

struct TrainingReport {
    StageReport main, ancillary, combiner;
    // populated only when ModelConfig::joint_finetune is set
    std::optional<StageReport> joint;
    std::int64_t parameter_count = 0;
    // volatile; reported on the console but excluded from serialized
    // artifacts so reruns stay byte-identical
    double wall_clock_seconds = 0.0;
};

// The three-part forecasting model: a main network (LSTM encoder + dense
// stack), an ancillary network over binary calendar indicators, and a
// rectified weighted-average combiner
//     y = relu(w1 * y_main + w2 * y_anc)
// trained in three stages (main alone, ancillary alone, then only the
// combiner weights with both subnetworks frozen).
class AdjointModel : public Forecaster {
public:
    AdjointModel() = default;
    static AdjointModel init(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    int horizon() const override { return cfg_.horizon; }
    std::string tag() const override;

    // Single-window inference, raw features in, deg F out, dropout off.
    std::vector<double> forward_main(std::span<const double> window) const;
    // Validates that every indicator is exactly 0 or 1.
    std::vector<double> forward_ancillary(
        std::span<const double> anc_window) const;
    // relu(w1 * y_main + w2 * y_anc), elementwise.
    std::vector<double> combine(std::span<const double> y_main,
                                std::span<const double> y_anc) const;
    std::vector<double> predict(
        std::span<const double> window,
        std::span<const double> anc_window) const override;

    std::vector<double> mc_rows(std::span<const double> window,
                                std::span<const double> anc_window, int n,
                                std::uint64_t seed) const override;
    std::vector<double> predict_windows(
        const WindowedDataset& ds,
        std::span<const std::int64_t> windows) const override;

    TrainingReport train(const WindowedDataset& ds,
                         std::span<const std::int64_t> train_windows,
                         std::span<const std::int64_t> val_windows,
                         const TrainingConfig& cfg);

    std::vector<Tensor> main_params() const;
    std::vector<Tensor> ancillary_params() const;
    std::vector<Tensor> combiner_params() const;
    std::vector<Tensor> all_params() const;  // checkpoint order

    const FeatureScaler& feature_scaler() const { return fscaler_; }
    const TargetScaler& target_scaler() const { return tscaler_; }
    void set_scalers(FeatureScaler f, TargetScaler t);

    const Tensor& w1() const { return w1_; }
    const Tensor& w2() const { return w2_; }

private:
    friend struct ModelAccess;

    // Tape-aware batched forwards (deg F outputs).
    Tensor forward_main_t(std::span<const Tensor> xseq,
                          const DropoutCtx& dropout) const;
    Tensor forward_ancillary_t(const Tensor& anc_flat,
                               std::span<const Tensor> anc_seq,
                               const DropoutCtx& dropout) const;
    Tensor combine_t(const Tensor& y_main, const Tensor& y_anc) const;

    std::vector<double> predict_batch_f(const WindowedDataset& ds,
                                        std::span<const std::int64_t> windows,
                                        bool main_only, bool anc_only) const;

    ModelConfig cfg_;
    std::vector<LstmLayer> main_lstm_;
    std::vector<DenseLayer> main_ffn_;
    std::vector<LstmLayer> anc_lstm_;
    std::vector<DenseLayer> anc_ffn_;
    Tensor w1_, w2_;
    FeatureScaler fscaler_;
    TargetScaler tscaler_;
};

// FNV-1a over a parameter list's contents; used to verify the frozen-stage
// contract and checkpoint integrity in tests.
std::uint64_t params_fingerprint(std::span<const Tensor> params);

}  // namespace thermocast
