#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "thermocast/errors.hpp"
#include "thermocast/rng.hpp"
#include "thermocast/tensor.hpp"

using namespace thermocast;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -1.5,
                               double hi = 1.5) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Central finite differences against the analytic gradient for every
// coordinate of every parameter. `build` must be a pure function of the
// parameter values.
void check_gradients(std::vector<Tensor>& params,
                     const std::function<Tensor()>& build,
                     double tol = 1e-4) {
    Tape tape;
    {
        TapeScope scope(tape);
        Tensor loss = build();
        for (auto& p : params) p.zero_grad();
        backward(loss);
    }
    const double h = 1e-5;
    for (auto& p : params) {
        REQUIRE(p.has_grad());
        auto data = p.mutable_data();
        auto grad = p.grad();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double x = data[i];
            data[i] = x + h;
            const double f1 = build().item();
            data[i] = x - h;
            const double f0 = build().item();
            data[i] = x;
            const double fd = (f1 - f0) / (2.0 * h);
            const double a = grad[i];
            const double rel =
                std::fabs(a - fd) /
                std::max({1.0, std::fabs(a), std::fabs(fd)});
            INFO("param ", p.name(), " index ", i, " analytic ", a, " fd ",
                 fd);
            CHECK(rel < tol);
        }
    }
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("matmul identity and selector cases") {
    const Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    const Tensor m = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    const Tensor prod = matmul(eye, m);
    CHECK(prod.data()[0] == 1.0);
    CHECK(prod.data()[1] == 2.0);
    CHECK(prod.data()[2] == 3.0);
    CHECK(prod.data()[3] == 4.0);

    const Tensor sel = Tensor::from_data({1, 2}, {1, 0});
    const Tensor col = Tensor::from_data({2, 1}, {5, 7});
    CHECK(matmul(sel, col).item() == 5.0);
}

TEST_CASE("matmul matches a triple-loop oracle on a random 3x4 * 4x2") {
    Rng rng(11);
    const auto a = random_vec(12, rng);
    const auto b = random_vec(8, rng);
    const Tensor ta = Tensor::from_data({3, 4}, a);
    const Tensor tb = Tensor::from_data({4, 2}, b);
    const Tensor c = matmul(ta, tb);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += a[i * 4 + k] * b[k * 2 + j];
            CHECK(c.data()[i * 2 + j] == doctest::Approx(s).epsilon(1e-12));
        }
}

TEST_CASE("matmul shape mismatch names both shapes") {
    const Tensor a = Tensor::zeros({2, 3});
    const Tensor b = Tensor::zeros({2, 3});
    CHECK_THROWS_WITH_AS(matmul(a, b),
                         doctest::Contains("[2x3]"), DimensionError);
}

TEST_CASE("elementwise examples") {
    const Tensor x = Tensor::from_data({3}, {-1.0, 0.0, 2.0});
    const Tensor r = relu(x);
    CHECK(r.data()[0] == 0.0);
    CHECK(r.data()[1] == 0.0);
    CHECK(r.data()[2] == 2.0);
    CHECK(sigmoid(Tensor::scalar(0.0)).item() == doctest::Approx(0.5));
    CHECK_THROWS_AS(add(Tensor::zeros({2}), Tensor::zeros({3})),
                    DimensionError);
}

TEST_CASE("tanh gradient matches a central finite difference at x=0.3") {
    Tensor x = Tensor::param("x", {1}, {0.3});
    Tape tape;
    {
        TapeScope scope(tape);
        backward(sum(tanh(x)));
    }
    const double h = 1e-5;
    const double fd = (std::tanh(0.3 + h) - std::tanh(0.3 - h)) / (2.0 * h);
    CHECK(std::fabs(x.grad()[0] - fd) < 1e-7);
}

TEST_CASE("rmse examples") {
    const Tensor p = Tensor::from_data({2}, {0.0, 0.0});
    const Tensor t = Tensor::from_data({2}, {3.0, 4.0});
    CHECK(rmse_loss(p, p).item() == 0.0);
    CHECK(rmse_loss(p, t).item() == doctest::Approx(std::sqrt(12.5)));

    Rng rng(3);
    const auto pv = random_vec(96, rng, 50.0, 90.0);
    const auto tv = random_vec(96, rng, 50.0, 90.0);
    // independent two-pass oracle
    double sq = 0.0;
    for (int i = 0; i < 96; ++i) sq += (pv[i] - tv[i]) * (pv[i] - tv[i]);
    const double expect = std::sqrt(sq / 96.0);
    const Tensor tp = Tensor::from_data({96}, pv);
    const Tensor tt = Tensor::from_data({96}, tv);
    CHECK(rmse_loss(tp, tt).item() == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(
        rmse_loss(Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);
}

TEST_CASE("backward fills leaf gradients and accumulates across calls") {
    Tensor w = Tensor::param("w", {2, 3}, std::vector<double>(6, 0.25));
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = sum(w);
    backward(loss);
    for (double g : w.grad()) CHECK(g == 1.0);
    backward(loss);
    for (double g : w.grad()) CHECK(g == 2.0);
}

TEST_CASE("backward rejects non-scalar losses") {
    Tensor w = Tensor::param("w", {2}, {1.0, 2.0});
    Tape tape;
    TapeScope scope(tape);
    Tensor y = relu(w);
    CHECK_THROWS_AS(backward(y), ContractError);
}

TEST_CASE("backward of rmse through a scalar weight matches fin-diff") {
    Rng rng(17);
    Tensor w = Tensor::param("w", {1}, {0.8});
    const Tensor x = Tensor::from_data({1, 4}, random_vec(4, rng));
    const Tensor y = Tensor::from_data({1, 4}, random_vec(4, rng));
    auto build = [&] { return rmse_loss(scale(w, x), y); };
    std::vector<Tensor> params = {w};
    check_gradients(params, build, 1e-5);
}

TEST_CASE("tensor construction rejects non-finite values") {
    CHECK_THROWS_AS(
        Tensor::from_data({2}, {1.0, std::nan("")}), ValidationError);
    CHECK_THROWS_AS(
        Tensor::from_data({1}, {std::numeric_limits<double>::infinity()}),
        ValidationError);
    CHECK_THROWS_AS(Tensor::from_data({3}, {1.0}), DimensionError);
}

TEST_CASE("optimizer: zero gradient leaves parameters unchanged") {
    Tensor w = Tensor::param("w", {3}, {1.0, -2.0, 0.5});
    AdamOptimizer opt({w});
    w.zero_grad();
    Tape tape;
    {
        TapeScope scope(tape);
        backward(sum(mul(w, Tensor::zeros({3}))));  // d/dw = 0
    }
    opt.step();
    CHECK(w.data()[0] == 1.0);
    CHECK(w.data()[1] == -2.0);
    CHECK(w.data()[2] == 0.5);
    CHECK(opt.step_count() == 1);
}

TEST_CASE("optimizer: converges on the quadratic (w-3)^2") {
    Tensor w = Tensor::param("w", {1}, {0.0});
    const Tensor target = Tensor::scalar(3.0);
    AdamOptimizer opt({w}, {.lr = 0.05});
    for (int i = 0; i < 500; ++i) {
        Tape tape;
        TapeScope scope(tape);
        Tensor loss = mul(sub(w, target), sub(w, target));
        opt.zero_grad();
        backward(loss);
        opt.step();
    }
    CHECK(std::fabs(w.data()[0] - 3.0) < 1e-2);
    CHECK(opt.step_count() == 500);
}

TEST_CASE("optimizer: missing gradient names the parameter") {
    Tensor w = Tensor::param("dangling", {2}, {1.0, 1.0});
    AdamOptimizer opt({w});
    CHECK_THROWS_WITH_AS(opt.step(), doctest::Contains("dangling"),
                         ContractError);
}

TEST_CASE("count_parameters") {
    CHECK(count_parameters({}) == 0);
    const std::vector<Tensor> params = {
        Tensor::param("w", {3, 4}, std::vector<double>(12, 0.0)),
        Tensor::param("b", {4}, std::vector<double>(4, 0.0))};
    CHECK(count_parameters(params) == 16);
}

TEST_CASE("gradients of every primitive match finite differences "
          "(property over 100 seeds)") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const int rows = 2 + static_cast<int>(rng.below(3));
        const int cols = 2 + static_cast<int>(rng.below(3));
        const auto n = static_cast<std::size_t>(rows * cols);

        Tensor a = Tensor::param("a", {rows, cols}, random_vec(n, rng));
        Tensor b = Tensor::param("b", {rows, cols}, random_vec(n, rng));
        Tensor w = Tensor::param(
            "w", {cols, cols},
            random_vec(static_cast<std::size_t>(cols) * cols, rng));
        Tensor bias = Tensor::param("bias", {cols},
                                    random_vec(static_cast<std::size_t>(cols),
                                               rng));
        Tensor s = Tensor::param("s", {1}, {rng.uniform(0.2, 1.5)});
        const Tensor target =
            Tensor::from_data({rows, cols}, random_vec(n, rng, 0.5, 2.0));

        std::vector<Tensor> params = {a, b, w, bias, s};
        auto build = [&] {
            Tensor lin = linear(a, w, bias);         // [rows x cols]
            Tensor mixed = add(mul(lin, b), scale(s, tanh(a)));
            Tensor act = sigmoid(mixed);
            Tensor cat = concat_cols({act, relu(sub(a, b))});
            Tensor mm = matmul(cat, Tensor::from_data(
                                        {2 * cols, cols},
                                        std::vector<double>(
                                            static_cast<std::size_t>(2 *
                                                                     cols) *
                                                cols,
                                            0.3)));
            Rng drop_rng(seed * 7919);
            Tensor dropped = dropout(mm, 0.25, drop_rng);
            return rmse_loss(affine(dropped, 1.3, -0.2), target);
        };
        check_gradients(params, build);
    }
}

TEST_CASE("ops outside a tape scope compute values without tracking") {
    Tensor w = Tensor::param("w", {2}, {1.0, 2.0});
    Tensor y = relu(w);
    CHECK_FALSE(y.requires_grad());
    CHECK(y.is_leaf());
}

}  // TEST_SUITE
