#include "thermocast/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace thermocast::kernels {

namespace serial {

void matmul_nn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc) {
    for (int i = 0; i < r; ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        if (!acc) std::memset(ci, 0, sizeof(double) * n);
        const double* ai = a + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc) {
    for (int i = 0; i < r; ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * k;
        double* ci = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<std::size_t>(j) * k;
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = acc ? ci[j] + s : s;
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc) {
    // c[i][j] (+)= sum_p a[p][i] * b[p][j]
    for (int i = 0; i < r; ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < k; ++p)
                s += a[static_cast<std::size_t>(p) * r + i] *
                     b[static_cast<std::size_t>(p) * n + j];
            ci[j] = acc ? ci[j] + s : s;
        }
    }
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void sigmoid(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void tanh(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
}

void relu(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void axpy(double s, const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += s * x[i];
}

void affine(const double* x, double scale, double shift, double* out,
            std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * x[i] + shift;
}

void sigmoid_backward(const double* y, const double* dy, double* dx,
                      std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
}

void tanh_backward(const double* y, const double* dy, double* dx,
                   std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
}

void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] += x[i] > 0.0 ? dy[i] : 0.0;
}

void mul_backward(const double* other, const double* dy, double* dx,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] += dy[i] * other[i];
}

void colsum(const double* m, double* col, int rows, int cols) {
    for (int j = 0; j < cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows; ++i)
            s += m[static_cast<std::size_t>(i) * cols + j];
        col[j] += s;
    }
}

}  // namespace serial

namespace omp {

// Each parallel loop assigns whole output elements (or rows) to one thread,
// keeping the per-element summation order identical to the serial kernels.

void matmul_nn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < r; ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        if (!acc) std::memset(ci, 0, sizeof(double) * n);
        const double* ai = a + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < r; ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * k;
        double* ci = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + static_cast<std::size_t>(j) * k;
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = acc ? ci[j] + s : s;
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < r; ++i) {
        double* ci = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < k; ++p)
                s += a[static_cast<std::size_t>(p) * r + i] *
                     b[static_cast<std::size_t>(p) * n + j];
            ci[j] = acc ? ci[j] + s : s;
        }
    }
}

#define THERMOCAST_OMP_MAP(expr)                                  \
    _Pragma("omp parallel for schedule(static)")                  \
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) { \
        expr;                                                     \
    }

void add(const double* a, const double* b, double* out, std::size_t n) {
    THERMOCAST_OMP_MAP(out[i] = a[i] + b[i])
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
    THERMOCAST_OMP_MAP(out[i] = a[i] - b[i])
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    THERMOCAST_OMP_MAP(out[i] = a[i] * b[i])
}

void sigmoid(const double* x, double* out, std::size_t n) {
    THERMOCAST_OMP_MAP(out[i] = 1.0 / (1.0 + std::exp(-x[i])))
}

void tanh(const double* x, double* out, std::size_t n) {
    THERMOCAST_OMP_MAP(out[i] = std::tanh(x[i]))
}

void relu(const double* x, double* out, std::size_t n) {
    THERMOCAST_OMP_MAP(out[i] = x[i] > 0.0 ? x[i] : 0.0)
}

void axpy(double s, const double* x, double* out, std::size_t n) {
    THERMOCAST_OMP_MAP(out[i] += s * x[i])
}

void affine(const double* x, double scale, double shift, double* out,
            std::size_t n) {
    THERMOCAST_OMP_MAP(out[i] = scale * x[i] + shift)
}

void sigmoid_backward(const double* y, const double* dy, double* dx,
                      std::size_t n) {
    THERMOCAST_OMP_MAP(dx[i] += dy[i] * y[i] * (1.0 - y[i]))
}

void tanh_backward(const double* y, const double* dy, double* dx,
                   std::size_t n) {
    THERMOCAST_OMP_MAP(dx[i] += dy[i] * (1.0 - y[i] * y[i]))
}

void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n) {
    THERMOCAST_OMP_MAP(dx[i] += x[i] > 0.0 ? dy[i] : 0.0)
}

void mul_backward(const double* other, const double* dy, double* dx,
                  std::size_t n) {
    THERMOCAST_OMP_MAP(dx[i] += dy[i] * other[i])
}

#undef THERMOCAST_OMP_MAP

void colsum(const double* m, double* col, int rows, int cols) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows; ++i)
            s += m[static_cast<std::size_t>(i) * cols + j];
        col[j] += s;
    }
}

}  // namespace omp

namespace {

std::atomic<bool> g_parallel_enabled{true};

// Work thresholds below which the fork overhead dominates.
constexpr long long kMatmulFlopCutoff = 32 * 1024;
constexpr std::size_t kMapCutoff = 16 * 1024;

inline bool use_parallel(long long work, long long cutoff) {
#ifdef _OPENMP
    return g_parallel_enabled.load(std::memory_order_relaxed) &&
           work >= cutoff && !omp_in_parallel();
#else
    (void)work;
    (void)cutoff;
    return false;
#endif
}

}  // namespace

bool parallel_available() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

void set_parallel_enabled(bool enabled) {
    g_parallel_enabled.store(enabled, std::memory_order_relaxed);
}

bool parallel_enabled() {
    return parallel_available() &&
           g_parallel_enabled.load(std::memory_order_relaxed);
}

void matmul_nn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc) {
    if (use_parallel(1LL * r * k * n, kMatmulFlopCutoff))
        omp::matmul_nn(a, b, c, r, k, n, acc);
    else
        serial::matmul_nn(a, b, c, r, k, n, acc);
}

void matmul_nt(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc) {
    if (use_parallel(1LL * r * k * n, kMatmulFlopCutoff))
        omp::matmul_nt(a, b, c, r, k, n, acc);
    else
        serial::matmul_nt(a, b, c, r, k, n, acc);
}

void matmul_tn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc) {
    if (use_parallel(1LL * r * k * n, kMatmulFlopCutoff))
        omp::matmul_tn(a, b, c, r, k, n, acc);
    else
        serial::matmul_tn(a, b, c, r, k, n, acc);
}

#define THERMOCAST_DISPATCH_MAP(name, ...)                      \
    if (use_parallel(static_cast<long long>(n), kMapCutoff))    \
        omp::name(__VA_ARGS__);                                 \
    else                                                        \
        serial::name(__VA_ARGS__);

void add(const double* a, const double* b, double* out, std::size_t n) {
    THERMOCAST_DISPATCH_MAP(add, a, b, out, n)
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
    THERMOCAST_DISPATCH_MAP(sub, a, b, out, n)
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
    THERMOCAST_DISPATCH_MAP(mul, a, b, out, n)
}
void sigmoid(const double* x, double* out, std::size_t n) {
    THERMOCAST_DISPATCH_MAP(sigmoid, x, out, n)
}
void tanh(const double* x, double* out, std::size_t n) {
    THERMOCAST_DISPATCH_MAP(tanh, x, out, n)
}
void relu(const double* x, double* out, std::size_t n) {
    THERMOCAST_DISPATCH_MAP(relu, x, out, n)
}
void axpy(double s, const double* x, double* out, std::size_t n) {
    THERMOCAST_DISPATCH_MAP(axpy, s, x, out, n)
}
void affine(const double* x, double scale, double shift, double* out,
            std::size_t n) {
    THERMOCAST_DISPATCH_MAP(affine, x, scale, shift, out, n)
}
void sigmoid_backward(const double* y, const double* dy, double* dx,
                      std::size_t n) {
    THERMOCAST_DISPATCH_MAP(sigmoid_backward, y, dy, dx, n)
}
void tanh_backward(const double* y, const double* dy, double* dx,
                   std::size_t n) {
    THERMOCAST_DISPATCH_MAP(tanh_backward, y, dy, dx, n)
}
void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n) {
    THERMOCAST_DISPATCH_MAP(relu_backward, x, dy, dx, n)
}
void mul_backward(const double* other, const double* dy, double* dx,
                  std::size_t n) {
    THERMOCAST_DISPATCH_MAP(mul_backward, other, dy, dx, n)
}

#undef THERMOCAST_DISPATCH_MAP

void colsum(const double* m, double* col, int rows, int cols) {
    if (use_parallel(1LL * rows * cols, kMapCutoff))
        omp::colsum(m, col, rows, cols);
    else
        serial::colsum(m, col, rows, cols);
}

}  // namespace thermocast::kernels
