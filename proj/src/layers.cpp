#include "thermocast/layers.hpp"

#include <cmath>

#include "thermocast/errors.hpp"

namespace thermocast {

Tensor DropoutCtx::apply(const Tensor& x) const {
    if (!spec.active()) return x;
    if (!per_row.empty()) return dropout_rows(x, spec.rate, per_row);
    if (shared == nullptr)
        throw ContractError("active dropout needs an rng stream");
    return dropout(x, spec.rate, *shared);
}

namespace {

std::vector<double> xavier_uniform(int fan_in, int fan_out, std::size_t n,
                                   Rng& rng) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(n);
    for (auto& v : w) v = rng.uniform(-bound, bound);
    return w;
}

}  // namespace

DenseLayer DenseLayer::init(int in, int out, Activation act, Rng& rng,
                            const std::string& name) {
    DenseLayer layer;
    layer.weight = Tensor::param(
        name + ".weight", {out, in},
        xavier_uniform(in, out, static_cast<std::size_t>(in) * out, rng));
    layer.bias =
        Tensor::param(name + ".bias", {out}, std::vector<double>(out, 0.0));
    layer.activation = act;
    return layer;
}

Tensor DenseLayer::forward(const Tensor& x) const {
    Tensor y = linear(x, weight, bias);
    return activation == Activation::relu ? relu(y) : y;
}

void DenseLayer::collect_params(std::vector<Tensor>& out) const {
    out.push_back(weight);
    out.push_back(bias);
}

Tensor dense_forward(std::span<const DenseLayer> net, Tensor x,
                     const DropoutCtx& dropout) {
    for (std::size_t i = 0; i < net.size(); ++i) {
        x = net[i].forward(x);
        if (i + 1 < net.size()) x = dropout.apply(x);
    }
    return x;
}

LstmLayer LstmLayer::init(int input, int hidden, Rng& rng,
                          const std::string& name) {
    LstmLayer l;
    l.input_size = input;
    l.hidden_size = hidden;
    const auto wn = static_cast<std::size_t>(hidden) * input;
    const auto un = static_cast<std::size_t>(hidden) * hidden;
    auto wmat = [&](const char* gate) {
        return Tensor::param(name + ".w_" + gate, {hidden, input},
                             xavier_uniform(input, hidden, wn, rng));
    };
    auto umat = [&](const char* gate) {
        return Tensor::param(name + ".u_" + gate, {hidden, hidden},
                             xavier_uniform(hidden, hidden, un, rng));
    };
    l.w_input = wmat("input");
    l.w_forget = wmat("forget");
    l.w_cell = wmat("cell");
    l.w_output = wmat("output");
    l.u_input = umat("input");
    l.u_forget = umat("forget");
    l.u_cell = umat("cell");
    l.u_output = umat("output");
    l.b_input = Tensor::param(name + ".b_input", {hidden},
                              std::vector<double>(hidden, 0.0));
    l.b_forget = Tensor::param(name + ".b_forget", {hidden},
                               std::vector<double>(hidden, 1.0));
    l.b_cell = Tensor::param(name + ".b_cell", {hidden},
                             std::vector<double>(hidden, 0.0));
    l.b_output = Tensor::param(name + ".b_output", {hidden},
                               std::vector<double>(hidden, 0.0));
    return l;
}

std::pair<Tensor, Tensor> LstmLayer::step(const Tensor& x, const Tensor& h,
                                          const Tensor& c) const {
    if (x.shape().size() != 2 || x.cols() != input_size)
        throw DimensionError("lstm step: input shape " + shape_str(x.shape()) +
                             " does not match input_size " +
                             std::to_string(input_size));
    if (h.shape() != c.shape() || h.shape().size() != 2 ||
        h.cols() != hidden_size || h.rows() != x.rows())
        throw DimensionError("lstm step: state shape " + shape_str(h.shape()) +
                             " does not match hidden_size " +
                             std::to_string(hidden_size));
    Tensor gi = sigmoid(add(linear(x, w_input, b_input), linear(h, u_input)));
    Tensor gf =
        sigmoid(add(linear(x, w_forget, b_forget), linear(h, u_forget)));
    Tensor gg = tanh(add(linear(x, w_cell, b_cell), linear(h, u_cell)));
    Tensor go =
        sigmoid(add(linear(x, w_output, b_output), linear(h, u_output)));
    Tensor c_next = add(mul(gf, c), mul(gi, gg));
    Tensor h_next = mul(go, tanh(c_next));
    return {h_next, c_next};
}

void LstmLayer::collect_params(std::vector<Tensor>& out) const {
    for (const Tensor* t :
         {&w_input, &w_forget, &w_cell, &w_output, &u_input, &u_forget,
          &u_cell, &u_output, &b_input, &b_forget, &b_cell, &b_output})
        out.push_back(*t);
}

std::pair<std::vector<double>, std::vector<double>> lstm_step(
    const LstmLayer& layer, std::span<const double> x,
    std::span<const double> h_prev, std::span<const double> c_prev) {
    Tensor xt = Tensor::from_data({1, static_cast<std::int64_t>(x.size())},
                                  {x.begin(), x.end()});
    Tensor ht =
        Tensor::from_data({1, static_cast<std::int64_t>(h_prev.size())},
                          {h_prev.begin(), h_prev.end()});
    Tensor ct =
        Tensor::from_data({1, static_cast<std::int64_t>(c_prev.size())},
                          {c_prev.begin(), c_prev.end()});
    auto [h, c] = layer.step(xt, ht, ct);
    return {{h.data().begin(), h.data().end()},
            {c.data().begin(), c.data().end()}};
}

Tensor lstm_encode(std::span<const LstmLayer> stack,
                   std::span<const Tensor> sequence,
                   const DropoutCtx& dropout) {
    if (sequence.empty())
        throw DomainError("lstm_encode: empty input sequence");
    if (stack.empty()) throw DomainError("lstm_encode: empty layer stack");
    const std::int64_t batch = sequence.front().rows();

    std::vector<Tensor> inputs(sequence.begin(), sequence.end());
    std::vector<Tensor> final_h(stack.size()), final_c(stack.size());
    for (std::size_t l = 0; l < stack.size(); ++l) {
        const auto& layer = stack[l];
        Tensor h = Tensor::zeros({batch, layer.hidden_size});
        Tensor c = Tensor::zeros({batch, layer.hidden_size});
        const bool last = l + 1 == stack.size();
        for (std::size_t t = 0; t < inputs.size(); ++t) {
            auto [hn, cn] = layer.step(inputs[t], h, c);
            h = hn;
            c = cn;
            if (!last) inputs[t] = dropout.apply(h);
        }
        final_h[l] = h;
        final_c[l] = c;
    }
    std::vector<Tensor> parts;
    parts.reserve(stack.size() * 2);
    for (const auto& h : final_h) parts.push_back(h);
    for (const auto& c : final_c) parts.push_back(c);
    return concat_cols(parts);
}

}  // namespace thermocast
