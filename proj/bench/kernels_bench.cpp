// Serial-vs-OpenMP kernel comparison. The serial implementations are the
// reference the tests check against; this target measures what the parallel
// variants buy on this machine.

#include <benchmark/benchmark.h>

#include <vector>

#include "thermocast/kernels.hpp"
#include "thermocast/rng.hpp"

namespace {

using namespace thermocast;

std::vector<double> random_matrix(std::int64_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> m(static_cast<std::size_t>(n));
    for (auto& v : m) v = rng.uniform(-1.0, 1.0);
    return m;
}

void bm_matmul_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto a = random_matrix(1LL * n * n, 1);
    const auto b = random_matrix(1LL * n * n, 2);
    std::vector<double> c(static_cast<std::size_t>(n) * n);
    for (auto _ : state) {
        kernels::serial::matmul_nn(a.data(), b.data(), c.data(), n, n, n,
                                   false);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

void bm_matmul_omp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto a = random_matrix(1LL * n * n, 1);
    const auto b = random_matrix(1LL * n * n, 2);
    std::vector<double> c(static_cast<std::size_t>(n) * n);
    for (auto _ : state) {
        kernels::omp::matmul_nn(a.data(), b.data(), c.data(), n, n, n, false);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

// The gate shape that dominates training: [batch x in] * [hidden x in]^T.
void bm_gate_serial(benchmark::State& state) {
    const int batch = static_cast<int>(state.range(0));
    const int in = 17, hidden = 64;
    const auto x = random_matrix(1LL * batch * in, 3);
    const auto w = random_matrix(1LL * hidden * in, 4);
    std::vector<double> y(static_cast<std::size_t>(batch) * hidden);
    for (auto _ : state) {
        kernels::serial::matmul_nt(x.data(), w.data(), y.data(), batch, in,
                                   hidden, false);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * batch * in * hidden);
}

void bm_gate_omp(benchmark::State& state) {
    const int batch = static_cast<int>(state.range(0));
    const int in = 17, hidden = 64;
    const auto x = random_matrix(1LL * batch * in, 3);
    const auto w = random_matrix(1LL * hidden * in, 4);
    std::vector<double> y(static_cast<std::size_t>(batch) * hidden);
    for (auto _ : state) {
        kernels::omp::matmul_nt(x.data(), w.data(), y.data(), batch, in,
                                hidden, false);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * batch * in * hidden);
}

void bm_tanh_serial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_matrix(static_cast<std::int64_t>(n), 5);
    std::vector<double> y(n);
    for (auto _ : state) {
        kernels::serial::tanh(x.data(), y.data(), n);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void bm_tanh_omp(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = random_matrix(static_cast<std::int64_t>(n), 5);
    std::vector<double> y(n);
    for (auto _ : state) {
        kernels::omp::tanh(x.data(), y.data(), n);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

BENCHMARK(bm_matmul_serial)->Arg(64)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_matmul_omp)->Arg(64)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_gate_serial)->Arg(32)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_gate_omp)->Arg(32)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_tanh_serial)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_tanh_omp)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

}  // namespace

BENCHMARK_MAIN();
