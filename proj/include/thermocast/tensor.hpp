#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "thermocast/rng.hpp"

namespace thermocast {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

namespace detail {

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    bool is_leaf = true;
    std::string name;

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

}  // namespace detail

// Dense N-d tensor of doubles with reverse-mode gradient tracking. Copying a
// Tensor copies a handle to shared storage; ops return fresh tensors. While
// a Tape is active (see below), ops on tracked tensors record themselves so
// backward() can replay the computation in reverse.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    // Validates that every value is finite; throws ValidationError otherwise.
    static Tensor from_data(Shape shape, std::vector<double> data);
    static Tensor scalar(double value);
    // Trainable leaf with a name for optimizer diagnostics and checkpoints.
    static Tensor param(std::string name, Shape shape,
                        std::vector<double> data);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::int64_t size() const { return impl_->size(); }
    std::int64_t rows() const { return impl_->shape[0]; }
    std::int64_t cols() const { return impl_->shape[1]; }

    std::span<const double> data() const { return impl_->data; }
    std::span<double> mutable_data() { return impl_->data; }
    // Gradient buffer; empty span if no gradient has been accumulated.
    std::span<const double> grad() const { return impl_->grad; }
    bool has_grad() const { return !impl_->grad.empty(); }

    bool requires_grad() const { return impl_->requires_grad; }
    bool is_leaf() const { return impl_->is_leaf; }
    const std::string& name() const { return impl_->name; }

    double item() const;  // scalar tensors only
    double at(std::int64_t i) const { return impl_->data[i]; }

    void zero_grad() {
        if (!impl_->grad.empty())
            std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
    }

    std::shared_ptr<detail::TensorImpl> impl() const { return impl_; }

private:
    friend Tensor wrap(std::shared_ptr<detail::TensorImpl> impl);
    std::shared_ptr<detail::TensorImpl> impl_;
};

// Ordered record of the primitive ops applied while a TapeScope is active.
// Every record precedes its consumers, and backward() visits records exactly
// once in reverse order.
class Tape {
public:
    struct Record {
        const char* op;
        std::shared_ptr<detail::TensorImpl> out;
        std::function<void()> backward;
    };

    void push(const char* op, std::shared_ptr<detail::TensorImpl> out,
              std::function<void()> backward) {
        records_.push_back({op, std::move(out), std::move(backward)});
    }

    std::size_t size() const { return records_.size(); }
    const std::vector<Record>& records() const { return records_; }
    std::vector<Record>& records() { return records_; }
    void clear() { records_.clear(); }

private:
    std::vector<Record> records_;
};

// RAII activation of a tape on the current thread. Ops executed with no
// active tape compute values only (inference mode).
class TapeScope {
public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* previous_;
};

Tape* active_tape();

// ---- primitive ops (forward + recorded gradient) ----

// Standard matrix product, a[r x k] * b[k x c].
Tensor matmul(const Tensor& a, const Tensor& b);
// x[B x in] * W[out x in]^T (+ bias broadcast over rows). Fused so an
// affine layer costs one tape record.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor linear(const Tensor& x, const Tensor& weight);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
// s (scalar tensor) * x, broadcast. Gradient flows to both.
Tensor scale(const Tensor& s, const Tensor& x);
// a * x + b with constant coefficients (normalization / denormalization).
Tensor affine(const Tensor& x, double a, double b);
// Column-wise concatenation of [B x c_i] blocks.
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor sum(const Tensor& x);
// Inverted dropout: zeroes units with probability p and scales survivors by
// 1/(1-p), so the expectation is the identity. The mask is drawn from `rng`
// and saved for the backward pass.
Tensor dropout(const Tensor& x, double p, Rng& rng);
// Row-wise variant for Monte-Carlo sampling: row r of x[B x C] draws its
// mask from rngs[r], so a batched pass over B independent sample streams
// reproduces B serial passes exactly.
Tensor dropout_rows(const Tensor& x, double p, std::span<Rng> rngs);
// sqrt(mean((pred - target)^2)); gradient defined as 0 at exact equality.
Tensor rmse_loss(const Tensor& pred, const Tensor& target);

// Accumulates dLoss/dLeaf into every requires_grad leaf reachable from
// `loss`. Repeated calls without zero_grad accumulate. Must run inside the
// TapeScope that recorded the loss.
void backward(const Tensor& loss);

std::int64_t count_parameters(std::span<const Tensor> params);

// Adaptive-moment gradient descent over a fixed parameter list.
class AdamOptimizer {
public:
    struct Options {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    explicit AdamOptimizer(std::vector<Tensor> params)
        : AdamOptimizer(std::move(params), Options{}) {}
    AdamOptimizer(std::vector<Tensor> params, Options opts);

    // One update from the gradients currently held by the parameters.
    // Gradients are left untouched; call zero_grad() before the next
    // backward. Throws ContractError naming any parameter without a grad.
    void step();
    void zero_grad();
    std::int64_t step_count() const { return step_; }
    const std::vector<Tensor>& params() const { return params_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    Options opts_;
    std::int64_t step_ = 0;
};

}  // namespace thermocast
