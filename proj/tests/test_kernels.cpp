#include <cmath>
#include <vector>

#include "doctest.h"
#include "thermocast/kernels.hpp"
#include "thermocast/rng.hpp"

using namespace thermocast;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

// Plain i-j-k dot-product reference, independent of the ikj kernels.
std::vector<double> matmul_reference(const std::vector<double>& a,
                                     const std::vector<double>& b, int r,
                                     int k, int n) {
    std::vector<double> c(static_cast<std::size_t>(r) * n, 0.0);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < k; ++p)
                s += a[static_cast<std::size_t>(i) * k + p] *
                     b[static_cast<std::size_t>(p) * n + j];
            c[static_cast<std::size_t>(i) * n + j] = s;
        }
    return c;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("matmul_nn matches the triple-loop oracle on random instances") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const int r = 1 + static_cast<int>(rng.below(12));
        const int k = 1 + static_cast<int>(rng.below(12));
        const int n = 1 + static_cast<int>(rng.below(12));
        const auto a = random_vec(static_cast<std::size_t>(r) * k, rng);
        const auto b = random_vec(static_cast<std::size_t>(k) * n, rng);
        std::vector<double> c(static_cast<std::size_t>(r) * n);
        kernels::serial::matmul_nn(a.data(), b.data(), c.data(), r, k, n,
                                   false);
        const auto expect = matmul_reference(a, b, r, k, n);
        for (std::size_t i = 0; i < c.size(); ++i)
            CHECK(c[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
}

TEST_CASE("matmul_nt and matmul_tn agree with explicit transposes") {
    Rng rng(7);
    const int r = 5, k = 7, n = 4;
    const auto a = random_vec(r * k, rng);
    const auto bt = random_vec(n * k, rng);  // b^T stored [n x k]
    std::vector<double> b(static_cast<std::size_t>(k) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
            b[static_cast<std::size_t>(j) * n + i] =
                bt[static_cast<std::size_t>(i) * k + j];
    std::vector<double> c1(r * n), c2(r * n);
    kernels::serial::matmul_nt(a.data(), bt.data(), c1.data(), r, k, n, false);
    const auto expect = matmul_reference(a, b, r, k, n);
    for (std::size_t i = 0; i < c1.size(); ++i)
        CHECK(c1[i] == doctest::Approx(expect[i]).epsilon(1e-12));

    // tn: c = a2^T * b2 where a2 is [k x r]
    const auto a2 = random_vec(k * r, rng);
    const auto b2 = random_vec(k * n, rng);
    std::vector<double> a2t(static_cast<std::size_t>(r) * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < r; ++j)
            a2t[static_cast<std::size_t>(j) * k + i] =
                a2[static_cast<std::size_t>(i) * r + j];
    kernels::serial::matmul_tn(a2.data(), b2.data(), c2.data(), r, k, n,
                               false);
    const auto expect2 = matmul_reference(a2t, b2, r, k, n);
    for (std::size_t i = 0; i < c2.size(); ++i)
        CHECK(c2[i] == doctest::Approx(expect2[i]).epsilon(1e-12));
}

TEST_CASE("accumulate variants add onto the output") {
    Rng rng(9);
    const int r = 3, k = 4, n = 2;
    const auto a = random_vec(r * k, rng);
    const auto b = random_vec(k * n, rng);
    std::vector<double> c(static_cast<std::size_t>(r) * n, 1.5);
    kernels::serial::matmul_nn(a.data(), b.data(), c.data(), r, k, n, true);
    const auto expect = matmul_reference(a, b, r, k, n);
    for (std::size_t i = 0; i < c.size(); ++i)
        CHECK(c[i] == doctest::Approx(1.5 + expect[i]).epsilon(1e-12));
}

TEST_CASE("OpenMP kernels are bit-identical to the serial reference") {
    if (!kernels::parallel_available()) return;
    Rng rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        const int r = 1 + static_cast<int>(rng.below(40));
        const int k = 1 + static_cast<int>(rng.below(40));
        const int n = 1 + static_cast<int>(rng.below(40));
        const auto a = random_vec(static_cast<std::size_t>(r) * k, rng);
        const auto b = random_vec(static_cast<std::size_t>(k) * n, rng);
        const auto bt = random_vec(static_cast<std::size_t>(n) * k, rng);
        std::vector<double> s1(static_cast<std::size_t>(r) * n),
            s2(static_cast<std::size_t>(r) * n);

        kernels::serial::matmul_nn(a.data(), b.data(), s1.data(), r, k, n,
                                   false);
        kernels::omp::matmul_nn(a.data(), b.data(), s2.data(), r, k, n,
                                false);
        CHECK(s1 == s2);

        kernels::serial::matmul_nt(a.data(), bt.data(), s1.data(), r, k, n,
                                   false);
        kernels::omp::matmul_nt(a.data(), bt.data(), s2.data(), r, k, n,
                                false);
        CHECK(s1 == s2);
    }

    const std::size_t n = 100000;
    Rng r2(5);
    const auto x = random_vec(n, r2);
    const auto y = random_vec(n, r2);
    std::vector<double> o1(n), o2(n);
    kernels::serial::tanh(x.data(), o1.data(), n);
    kernels::omp::tanh(x.data(), o2.data(), n);
    CHECK(o1 == o2);
    kernels::serial::mul(x.data(), y.data(), o1.data(), n);
    kernels::omp::mul(x.data(), y.data(), o2.data(), n);
    CHECK(o1 == o2);
    kernels::serial::sigmoid(x.data(), o1.data(), n);
    kernels::omp::sigmoid(x.data(), o2.data(), n);
    CHECK(o1 == o2);
}

TEST_CASE("dispatcher output does not depend on the parallel toggle") {
    Rng rng(77);
    const int r = 60, k = 50, n = 40;
    const auto a = random_vec(static_cast<std::size_t>(r) * k, rng);
    const auto b = random_vec(static_cast<std::size_t>(k) * n, rng);
    std::vector<double> c1(static_cast<std::size_t>(r) * n),
        c2(static_cast<std::size_t>(r) * n);
    kernels::set_parallel_enabled(false);
    kernels::matmul_nn(a.data(), b.data(), c1.data(), r, k, n, false);
    kernels::set_parallel_enabled(true);
    kernels::matmul_nn(a.data(), b.data(), c2.data(), r, k, n, false);
    CHECK(c1 == c2);
}

TEST_CASE("elementwise kernels match standard formulas") {
    const std::vector<double> x = {-1.0, 0.0, 2.0, -0.5};
    std::vector<double> out(4);
    kernels::serial::relu(x.data(), out.data(), 4);
    CHECK(out == std::vector<double>{0.0, 0.0, 2.0, 0.0});
    kernels::serial::sigmoid(x.data(), out.data(), 4);
    for (int i = 0; i < 4; ++i)
        CHECK(out[i] == doctest::Approx(1.0 / (1.0 + std::exp(-x[i]))));
    std::vector<double> col(2, 0.0);
    const std::vector<double> m = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};  // 3x2
    kernels::serial::colsum(m.data(), col.data(), 3, 2);
    CHECK(col == std::vector<double>{9.0, 12.0});
}

}  // TEST_SUITE
