#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermocast/rng.hpp"
#include "thermocast/tensor.hpp"

namespace thermocast {

struct DropoutSpec {
    enum class Mode { off, train, mc_inference };
    double rate = 0.0;
    Mode mode = Mode::off;

    bool active() const { return mode != Mode::off && rate > 0.0; }
};

// Dropout context threaded through forward passes: a shared batch stream
// for training, or one stream per row for Monte-Carlo sampling.
struct DropoutCtx {
    DropoutSpec spec;
    Rng* shared = nullptr;
    std::span<Rng> per_row;

    Tensor apply(const Tensor& x) const;

    static DropoutCtx off() { return {}; }
    static DropoutCtx training(double rate, Rng& rng) {
        return {{rate, DropoutSpec::Mode::train}, &rng, {}};
    }
    static DropoutCtx mc(double rate, std::span<Rng> rngs) {
        return {{rate, DropoutSpec::Mode::mc_inference}, nullptr, rngs};
    }
};

struct DenseLayer {
    enum class Activation { relu, identity };

    Tensor weight;  // [out x in]
    Tensor bias;    // [out]
    Activation activation = Activation::relu;

    // Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero bias.
    static DenseLayer init(int in, int out, Activation act, Rng& rng,
                           const std::string& name);

    int in_size() const { return static_cast<int>(weight.cols()); }
    int out_size() const { return static_cast<int>(weight.rows()); }

    Tensor forward(const Tensor& x) const;
    void collect_params(std::vector<Tensor>& out) const;
};

// Sequential dense stack; dropout after every hidden layer's activation,
// never after the final layer.
Tensor dense_forward(std::span<const DenseLayer> net, Tensor x,
                     const DropoutCtx& dropout);

struct LstmLayer {
    int input_size = 0;
    int hidden_size = 0;

    // gate weights [hidden x input], recurrent weights [hidden x hidden]
    Tensor w_input, w_forget, w_cell, w_output;
    Tensor u_input, u_forget, u_cell, u_output;
    Tensor b_input, b_forget, b_cell, b_output;  // forget bias starts at 1

    static LstmLayer init(int input, int hidden, Rng& rng,
                          const std::string& name);

    // One cell update over a batch: x [B x input], h/c [B x hidden].
    //   i = sigmoid(W_i x + U_i h + b_i)     f = sigmoid(W_f x + U_f h + b_f)
    //   g = tanh(W_g x + U_g h + b_g)        o = sigmoid(W_o x + U_o h + b_o)
    //   c' = f*c + i*g                       h' = o * tanh(c')
    std::pair<Tensor, Tensor> step(const Tensor& x, const Tensor& h,
                                   const Tensor& c) const;

    void collect_params(std::vector<Tensor>& out) const;
};

// Single-sample cell update (vectors of length input/hidden).
std::pair<std::vector<double>, std::vector<double>> lstm_step(
    const LstmLayer& layer, std::span<const double> x,
    std::span<const double> h_prev, std::span<const double> c_prev);

// Runs the stack over a [B x m] tensor per timestep, from zero initial
// states, and returns the concatenated final states [B x 2*sum(hidden)]
// (all hidden states first, then all cell states). Dropout is applied
// between layers (on the sequence feeding the next layer), not on the
// recurrent path. Throws DomainError on an empty sequence.
Tensor lstm_encode(std::span<const LstmLayer> stack,
                   std::span<const Tensor> sequence,
                   const DropoutCtx& dropout);

}  // namespace thermocast
