#include "thermocast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "thermocast/errors.hpp"
#include "thermocast/kernels.hpp"

namespace thermocast {

std::int64_t shape_size(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::int64_t{1},
                           std::multiplies<>());
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << 'x';
        os << s[i];
    }
    os << ']';
    return os.str();
}

namespace {

thread_local Tape* g_tape = nullptr;

using ImplPtr = std::shared_ptr<detail::TensorImpl>;

void check_shape_positive(const Shape& shape) {
    for (auto e : shape) {
        if (e <= 0)
            throw DimensionError("tensor extents must be positive, got " +
                                 shape_str(shape));
    }
}

void check_finite(const std::vector<double>& data) {
    for (double v : data) {
        if (!std::isfinite(v))
            throw ValidationError("non-finite value in tensor data");
    }
}

ImplPtr make_impl(Shape shape, std::vector<double> data) {
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    return impl;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " +
                             shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
}

void require_2d(const char* op, const Tensor& t) {
    if (t.shape().size() != 2)
        throw DimensionError(std::string(op) + ": expected 2-d tensor, got " +
                             shape_str(t.shape()));
}

bool tracked(const Tensor& t) { return t.requires_grad(); }

// Wraps the result of an op: marks it as a tracked intermediate and records
// the backward closure when a tape is active and any input is tracked.
Tensor record(const char* op, ImplPtr out, bool any_tracked,
              std::function<void()> backward);

}  // namespace

Tensor wrap(ImplPtr impl) {
    Tensor t;
    t.impl_ = std::move(impl);
    return t;
}

namespace {

Tensor record(const char* op, ImplPtr out, bool any_tracked,
              std::function<void()> backward) {
    if (g_tape != nullptr && any_tracked) {
        out->requires_grad = true;
        out->is_leaf = false;
        g_tape->push(op, out, std::move(backward));
    }
    return wrap(std::move(out));
}

}  // namespace

Tensor Tensor::zeros(Shape shape) {
    check_shape_positive(shape);
    auto n = static_cast<std::size_t>(shape_size(shape));
    return wrap(make_impl(std::move(shape), std::vector<double>(n, 0.0)));
}

Tensor Tensor::full(Shape shape, double value) {
    check_shape_positive(shape);
    if (!std::isfinite(value))
        throw ValidationError("non-finite fill value");
    auto n = static_cast<std::size_t>(shape_size(shape));
    return wrap(make_impl(std::move(shape), std::vector<double>(n, value)));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
    check_shape_positive(shape);
    if (shape_size(shape) != static_cast<std::int64_t>(data.size()))
        throw DimensionError("data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    check_finite(data);
    return wrap(make_impl(std::move(shape), std::move(data)));
}

Tensor Tensor::scalar(double value) { return full({1}, value); }

Tensor Tensor::param(std::string name, Shape shape, std::vector<double> data) {
    Tensor t = from_data(std::move(shape), std::move(data));
    t.impl_->requires_grad = true;
    t.impl_->is_leaf = true;
    t.impl_->name = std::move(name);
    return t;
}

double Tensor::item() const {
    if (size() != 1)
        throw ContractError("item() requires a scalar tensor, got " +
                            shape_str(shape()));
    return impl_->data[0];
}

TapeScope::TapeScope(Tape& tape) : previous_(g_tape) { g_tape = &tape; }
TapeScope::~TapeScope() { g_tape = previous_; }
Tape* active_tape() { return g_tape; }

// ---- ops ----

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d("matmul", a);
    require_2d("matmul", b);
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions differ, " +
                             shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    const int r = static_cast<int>(a.rows());
    const int k = static_cast<int>(a.cols());
    const int c = static_cast<int>(b.cols());
    auto out = make_impl({r, c}, std::vector<double>(
                                     static_cast<std::size_t>(r) * c));
    kernels::matmul_nn(a.data().data(), b.data().data(), out->data.data(), r,
                       k, c, false);
    auto ai = a.impl(), bi = b.impl(), oi = out;
    return record("matmul", out, tracked(a) || tracked(b), [=] {
        if (oi->grad.empty()) return;
        if (ai->requires_grad) {
            ai->ensure_grad();
            kernels::matmul_nt(oi->grad.data(), bi->data.data(),
                               ai->grad.data(), r, c, k, true);
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
            kernels::matmul_tn(ai->data.data(), oi->grad.data(),
                               bi->grad.data(), k, r, c, true);
        }
    });
}

namespace {

Tensor linear_impl(const Tensor& x, const Tensor& weight, const Tensor* bias) {
    require_2d("linear", x);
    require_2d("linear", weight);
    if (x.cols() != weight.cols())
        throw DimensionError("linear: input width " + shape_str(x.shape()) +
                             " does not match weight " +
                             shape_str(weight.shape()));
    const int batch = static_cast<int>(x.rows());
    const int in = static_cast<int>(x.cols());
    const int outw = static_cast<int>(weight.rows());
    if (bias && bias->size() != outw)
        throw DimensionError("linear: bias length " +
                             shape_str(bias->shape()) +
                             " does not match weight rows " +
                             std::to_string(outw));
    auto out = make_impl({batch, outw}, std::vector<double>(
                                            static_cast<std::size_t>(batch) *
                                            outw));
    kernels::matmul_nt(x.data().data(), weight.data().data(),
                       out->data.data(), batch, in, outw, false);
    if (bias) {
        for (int i = 0; i < batch; ++i)
            kernels::serial::add(out->data.data() +
                                     static_cast<std::size_t>(i) * outw,
                                 bias->data().data(),
                                 out->data.data() +
                                     static_cast<std::size_t>(i) * outw,
                                 static_cast<std::size_t>(outw));
    }
    auto xi = x.impl(), wi = weight.impl(), oi = out;
    ImplPtr bi = bias ? bias->impl() : nullptr;
    const bool any = tracked(x) || tracked(weight) ||
                     (bias != nullptr && tracked(*bias));
    return record("linear", out, any, [=] {
        if (oi->grad.empty()) return;
        if (xi->requires_grad) {
            xi->ensure_grad();
            kernels::matmul_nn(oi->grad.data(), wi->data.data(),
                               xi->grad.data(), batch, outw, in, true);
        }
        if (wi->requires_grad) {
            wi->ensure_grad();
            kernels::matmul_tn(oi->grad.data(), xi->data.data(),
                               wi->grad.data(), outw, batch, in, true);
        }
        if (bi && bi->requires_grad) {
            bi->ensure_grad();
            kernels::colsum(oi->grad.data(), bi->grad.data(), batch, outw);
        }
    });
}

}  // namespace

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    return linear_impl(x, weight, &bias);
}

Tensor linear(const Tensor& x, const Tensor& weight) {
    return linear_impl(x, weight, nullptr);
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    auto out = make_impl(a.shape(), std::vector<double>(a.size()));
    kernels::add(a.data().data(), b.data().data(), out->data.data(),
                 out->data.size());
    auto ai = a.impl(), bi = b.impl(), oi = out;
    return record("add", out, tracked(a) || tracked(b), [=] {
        if (oi->grad.empty()) return;
        if (ai->requires_grad) {
            ai->ensure_grad();
            kernels::axpy(1.0, oi->grad.data(), ai->grad.data(),
                          oi->grad.size());
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
            kernels::axpy(1.0, oi->grad.data(), bi->grad.data(),
                          oi->grad.size());
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    auto out = make_impl(a.shape(), std::vector<double>(a.size()));
    kernels::sub(a.data().data(), b.data().data(), out->data.data(),
                 out->data.size());
    auto ai = a.impl(), bi = b.impl(), oi = out;
    return record("sub", out, tracked(a) || tracked(b), [=] {
        if (oi->grad.empty()) return;
        if (ai->requires_grad) {
            ai->ensure_grad();
            kernels::axpy(1.0, oi->grad.data(), ai->grad.data(),
                          oi->grad.size());
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
            kernels::axpy(-1.0, oi->grad.data(), bi->grad.data(),
                          oi->grad.size());
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    auto out = make_impl(a.shape(), std::vector<double>(a.size()));
    kernels::mul(a.data().data(), b.data().data(), out->data.data(),
                 out->data.size());
    auto ai = a.impl(), bi = b.impl(), oi = out;
    return record("mul", out, tracked(a) || tracked(b), [=] {
        if (oi->grad.empty()) return;
        if (ai->requires_grad) {
            ai->ensure_grad();
            kernels::mul_backward(bi->data.data(), oi->grad.data(),
                                  ai->grad.data(), oi->grad.size());
        }
        if (bi->requires_grad) {
            bi->ensure_grad();
            kernels::mul_backward(ai->data.data(), oi->grad.data(),
                                  bi->grad.data(), oi->grad.size());
        }
    });
}

namespace {

template <typename Fwd, typename Bwd>
Tensor unary_op(const char* op, const Tensor& x, Fwd fwd, Bwd bwd) {
    auto out = make_impl(x.shape(), std::vector<double>(x.size()));
    fwd(x.data().data(), out->data.data(), out->data.size());
    auto xi = x.impl();
    auto oi = out;
    return record(op, out, tracked(x), [=] {
        if (oi->grad.empty() || !xi->requires_grad) return;
        xi->ensure_grad();
        bwd(xi, oi);
    });
}

}  // namespace

Tensor sigmoid(const Tensor& x) {
    return unary_op(
        "sigmoid", x,
        [](const double* in, double* out, std::size_t n) {
            kernels::sigmoid(in, out, n);
        },
        [](const ImplPtr& xi, const ImplPtr& oi) {
            kernels::sigmoid_backward(oi->data.data(), oi->grad.data(),
                                      xi->grad.data(), oi->grad.size());
        });
}

Tensor tanh(const Tensor& x) {
    return unary_op(
        "tanh", x,
        [](const double* in, double* out, std::size_t n) {
            kernels::tanh(in, out, n);
        },
        [](const ImplPtr& xi, const ImplPtr& oi) {
            kernels::tanh_backward(oi->data.data(), oi->grad.data(),
                                   xi->grad.data(), oi->grad.size());
        });
}

Tensor relu(const Tensor& x) {
    return unary_op(
        "relu", x,
        [](const double* in, double* out, std::size_t n) {
            kernels::relu(in, out, n);
        },
        [](const ImplPtr& xi, const ImplPtr& oi) {
            kernels::relu_backward(xi->data.data(), oi->grad.data(),
                                   xi->grad.data(), oi->grad.size());
        });
}

Tensor scale(const Tensor& s, const Tensor& x) {
    const bool scalar = s.size() == 1;
    const bool per_col = !scalar && x.shape().size() == 2 &&
                         s.shape().size() == 1 && s.size() == x.cols();
    const bool same = !scalar && !per_col && s.shape() == x.shape();
    if (!scalar && !per_col && !same)
        throw DimensionError("scale: weight shape " + shape_str(s.shape()) +
                             " incompatible with " + shape_str(x.shape()));
    auto out = make_impl(x.shape(), std::vector<double>(x.size()));
    const auto n = out->data.size();
    if (scalar) {
        kernels::affine(x.data().data(), s.at(0), 0.0, out->data.data(), n);
    } else if (same) {
        kernels::mul(s.data().data(), x.data().data(), out->data.data(), n);
    } else {
        const auto cols = static_cast<std::size_t>(x.cols());
        for (std::size_t i = 0; i < n; ++i)
            out->data[i] = s.at(static_cast<std::int64_t>(i % cols)) *
                           x.data()[i];
    }
    auto si = s.impl(), xi = x.impl(), oi = out;
    return record("scale", out, tracked(s) || tracked(x), [=] {
        if (oi->grad.empty()) return;
        const auto m = oi->grad.size();
        if (si->requires_grad) {
            si->ensure_grad();
            if (si->data.size() == 1) {
                double acc = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    acc += oi->grad[i] * xi->data[i];
                si->grad[0] += acc;
            } else if (si->data.size() == xi->data.size()) {
                kernels::mul_backward(xi->data.data(), oi->grad.data(),
                                      si->grad.data(), m);
            } else {
                const std::size_t cols = si->data.size();
                for (std::size_t i = 0; i < m; ++i)
                    si->grad[i % cols] += oi->grad[i] * xi->data[i];
            }
        }
        if (xi->requires_grad) {
            xi->ensure_grad();
            if (si->data.size() == 1) {
                kernels::axpy(si->data[0], oi->grad.data(), xi->grad.data(),
                              m);
            } else if (si->data.size() == xi->data.size()) {
                kernels::mul_backward(si->data.data(), oi->grad.data(),
                                      xi->grad.data(), m);
            } else {
                const std::size_t cols = si->data.size();
                for (std::size_t i = 0; i < m; ++i)
                    xi->grad[i] += oi->grad[i] * si->data[i % cols];
            }
        }
    });
}

Tensor affine(const Tensor& x, double a, double b) {
    auto out = make_impl(x.shape(), std::vector<double>(x.size()));
    kernels::affine(x.data().data(), a, b, out->data.data(), out->data.size());
    auto xi = x.impl(), oi = out;
    return record("affine", out, tracked(x), [=] {
        if (oi->grad.empty() || !xi->requires_grad) return;
        xi->ensure_grad();
        kernels::axpy(a, oi->grad.data(), xi->grad.data(), oi->grad.size());
    });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw DomainError("concat_cols: no inputs");
    std::int64_t batch = -1, total = 0;
    bool any = false;
    for (const auto& p : parts) {
        require_2d("concat_cols", p);
        if (batch < 0) batch = p.rows();
        if (p.rows() != batch)
            throw DimensionError("concat_cols: row count mismatch");
        total += p.cols();
        any = any || tracked(p);
    }
    auto out = make_impl({batch, total},
                         std::vector<double>(
                             static_cast<std::size_t>(batch) * total));
    std::int64_t off = 0;
    for (const auto& p : parts) {
        const auto c = p.cols();
        for (std::int64_t i = 0; i < batch; ++i)
            std::copy_n(p.data().data() + i * c, c,
                        out->data.data() + i * total + off);
        off += c;
    }
    std::vector<ImplPtr> impls;
    impls.reserve(parts.size());
    for (const auto& p : parts) impls.push_back(p.impl());
    auto oi = out;
    const std::int64_t tot = total, b = batch;
    return record("concat_cols", out, any, [=] {
        if (oi->grad.empty()) return;
        std::int64_t off2 = 0;
        for (const auto& pi : impls) {
            const auto c = pi->shape[1];
            if (pi->requires_grad) {
                pi->ensure_grad();
                for (std::int64_t i = 0; i < b; ++i)
                    for (std::int64_t j = 0; j < c; ++j)
                        pi->grad[i * c + j] += oi->grad[i * tot + off2 + j];
            }
            off2 += c;
        }
    });
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    auto out = make_impl({1}, {s});
    auto xi = x.impl(), oi = out;
    return record("sum", out, tracked(x), [=] {
        if (oi->grad.empty() || !xi->requires_grad) return;
        xi->ensure_grad();
        const double g = oi->grad[0];
        for (auto& v : xi->grad) v += g;
    });
}

Tensor dropout(const Tensor& x, double p, Rng& rng) {
    if (p < 0.0 || p >= 1.0)
        throw DomainError("dropout rate must be in [0, 1), got " +
                          std::to_string(p));
    if (p == 0.0) return x;
    const double keep_scale = 1.0 / (1.0 - p);
    auto mask = std::make_shared<std::vector<double>>(x.size());
    for (auto& m : *mask) m = rng.uniform() < p ? 0.0 : keep_scale;
    auto out = make_impl(x.shape(), std::vector<double>(x.size()));
    kernels::mul(x.data().data(), mask->data(), out->data.data(),
                 out->data.size());
    auto xi = x.impl(), oi = out;
    return record("dropout", out, tracked(x), [=] {
        if (oi->grad.empty() || !xi->requires_grad) return;
        xi->ensure_grad();
        kernels::mul_backward(mask->data(), oi->grad.data(), xi->grad.data(),
                              oi->grad.size());
    });
}

Tensor dropout_rows(const Tensor& x, double p, std::span<Rng> rngs) {
    if (p < 0.0 || p >= 1.0)
        throw DomainError("dropout rate must be in [0, 1), got " +
                          std::to_string(p));
    if (p == 0.0) return x;
    require_2d("dropout_rows", x);
    if (x.rows() != static_cast<std::int64_t>(rngs.size()))
        throw DimensionError("dropout_rows: need one rng per row");
    const double keep_scale = 1.0 / (1.0 - p);
    const auto cols = static_cast<std::size_t>(x.cols());
    auto mask = std::make_shared<std::vector<double>>(x.size());
    for (std::size_t r = 0; r < rngs.size(); ++r) {
        double* mrow = mask->data() + r * cols;
        for (std::size_t j = 0; j < cols; ++j)
            mrow[j] = rngs[r].uniform() < p ? 0.0 : keep_scale;
    }
    auto out = make_impl(x.shape(), std::vector<double>(x.size()));
    kernels::mul(x.data().data(), mask->data(), out->data.data(),
                 out->data.size());
    auto xi = x.impl(), oi = out;
    return record("dropout_rows", out, tracked(x), [=] {
        if (oi->grad.empty() || !xi->requires_grad) return;
        xi->ensure_grad();
        kernels::mul_backward(mask->data(), oi->grad.data(), xi->grad.data(),
                              oi->grad.size());
    });
}

Tensor rmse_loss(const Tensor& pred, const Tensor& target) {
    require_same_shape("rmse_loss", pred, target);
    if (pred.size() == 0) throw DomainError("rmse_loss: empty input");
    const auto n = pred.data().size();
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred.data()[i] - target.data()[i];
        sq += d * d;
    }
    const double value = std::sqrt(sq / static_cast<double>(n));
    auto out = make_impl({1}, {value});
    auto pi = pred.impl(), ti = target.impl(), oi = out;
    return record("rmse_loss", out, tracked(pred) || tracked(target), [=] {
        if (oi->grad.empty()) return;
        const double y = oi->data[0];
        if (y == 0.0) return;  // subgradient 0 at exact equality
        const double g = oi->grad[0] / (static_cast<double>(n) * y);
        if (pi->requires_grad) {
            pi->ensure_grad();
            for (std::size_t i = 0; i < n; ++i)
                pi->grad[i] += g * (pi->data[i] - ti->data[i]);
        }
        if (ti->requires_grad) {
            ti->ensure_grad();
            for (std::size_t i = 0; i < n; ++i)
                ti->grad[i] -= g * (pi->data[i] - ti->data[i]);
        }
    });
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1)
        throw ContractError("backward: loss must be a scalar tensor");
    Tape* tape = g_tape;
    if (tape == nullptr) {
        if (loss.is_leaf() && loss.requires_grad()) {
            loss.impl()->ensure_grad();
            loss.impl()->grad[0] += 1.0;
            return;
        }
        throw ContractError(
            "backward: no active tape recorded this computation");
    }
    // Fresh pass: intermediate gradients are per-call, leaf gradients
    // accumulate across calls.
    for (auto& rec : tape->records())
        if (!rec.out->is_leaf) rec.out->grad.clear();
    auto li = loss.impl();
    li->ensure_grad();
    li->grad[0] = li->is_leaf ? li->grad[0] + 1.0 : 1.0;
    auto& recs = tape->records();
    for (auto it = recs.rbegin(); it != recs.rend(); ++it) {
        if (!it->out->grad.empty()) it->backward();
    }
}

std::int64_t count_parameters(std::span<const Tensor> params) {
    std::int64_t total = 0;
    for (const auto& p : params) total += p.size();
    return total;
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, Options opts)
    : params_(std::move(params)), opts_(opts) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void AdamOptimizer::step() {
    for (const auto& p : params_) {
        if (!p.has_grad())
            throw ContractError("optimizer step: parameter '" + p.name() +
                                "' has no gradient");
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_));
    for (std::size_t idx = 0; idx < params_.size(); ++idx) {
        auto data = params_[idx].mutable_data();
        auto grad = params_[idx].grad();
        auto& m = m_[idx];
        auto& v = v_[idx];
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double g = grad[i];
            m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * g;
            v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            data[i] -= opts_.lr * mhat / (std::sqrt(vhat) + opts_.eps);
        }
    }
}

void AdamOptimizer::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

}  // namespace thermocast
